"""HTTP facade over the decision engine.

The service loads the fitted artifact bundle once at startup; every request
is answered from that immutable state plus the request's own seed, so
identical requests produce byte-identical responses. Interactive calls
default to a reduced ensemble; the cap is reported honestly in the
response's workload block.
"""

from __future__ import annotations

import hashlib
import json
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import __version__
from ..discount import ModelKind
from ..exposure import House
from ..hazard import return_level_summary
from ..pipeline import EngineBundle, RunConfig, analyze_house
from ..robustness import AcceptableRanges, domain_measure
from ..sow import Scenario
from .schemas import (AnalyzeRequest, AnalyzeResponse, CurvePoint,
                      HazardSummaryResponse, MetaResponse, ReturnLevelOut,
                      StrategyOut, Workload)


class ServiceState:
    def __init__(self):
        self.bundle: EngineBundle | None = None
        self.artifact_hash = ""

    def require_bundle(self) -> EngineBundle:
        if self.bundle is None:
            raise HTTPException(503, "artifacts not loaded yet")
        return self.bundle


def _artifact_hash(bundle: EngineBundle) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(bundle.posterior.mu).tobytes())
    h.update(np.ascontiguousarray(bundle.posterior.log_post).tobytes())
    for kind in sorted(bundle.models, key=lambda k: k.value):
        h.update(json.dumps(bundle.models[kind].rho).encode())
    return h.hexdigest()[:16]


def create_app(config: RunConfig, bundle: EngineBundle | None = None) -> FastAPI:
    """Build the service; ``bundle`` may be injected for tests."""
    state = ServiceState()
    svc = config["service"]

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if state.bundle is None:
            state.bundle = bundle or EngineBundle.load(config)
            state.artifact_hash = _artifact_hash(state.bundle)
        yield

    app = FastAPI(title="floodelev", version=__version__, lifespan=lifespan)

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(svc["cors_origins"]),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"),
             "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.get("/api/meta", response_model=MetaResponse)
    def meta() -> MetaResponse:
        b = state.require_bundle()
        return MetaResponse(
            engine_version=__version__,
            config_hash=config.config_hash(),
            artifact_hash=state.artifact_hash,
            posterior_size=len(b.posterior),
            posterior_seed=b.posterior.seed,
            acceptance_rate=b.posterior.acceptance_rate,
            discount_models=sorted(k.value for k in b.models),
            default_ensemble=svc["default_ensemble"],
            max_ensemble=svc["max_ensemble"],
        )

    @app.get("/api/hazard/summary", response_model=HazardSummaryResponse)
    def hazard_summary() -> HazardSummaryResponse:
        b = state.require_bundle()
        levels = [ReturnLevelOut(**vars(return_level_summary(b.posterior, T)))
                  for T in (10, 50, 100, 500)]
        return HazardSummaryResponse(bfe=b.bfe, return_levels=levels)

    @app.post("/api/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
        b = state.require_bundle()
        requested = req.options.ensemble_size
        n_sows = min(requested, svc["max_ensemble"])
        scenario = None
        if req.options.mode == "fixed":
            scenario = Scenario(req.options.damage_model,
                                ModelKind(req.options.discount_model))
        house = House(req.house.value, req.house.size_sqft,
                      req.house.floor_rel_bfe, req.house.label)
        ranges = AcceptableRanges(
            bcr_min=req.options.ranges.bcr_min,
            total_ratio_max=req.options.ranges.total_ratio_max,
            reliability_min=req.options.ranges.reliability_min,
        )
        override = RunConfig(
            raw={**b.config.raw,
                 "ranges": {"bcr_min": ranges.bcr_min,
                            "total_ratio_max": ranges.total_ratio_max,
                            "reliability_min": ranges.reliability_min}},
            base_dir=b.config.base_dir,
        )
        bundle_view = EngineBundle(
            config=override, posterior=b.posterior, models=b.models,
            curves=b.curves, bfe=b.bfe, map_params=b.map_params,
            _worlds=b._worlds,
        )
        report = analyze_house(bundle_view, house, n_sows=n_sows,
                               seed=req.options.seed, mode=req.options.mode,
                               scenario=scenario)
        surf = report["surfaces"]["considering"]
        rob = report["robustness"]
        front = set(report["pareto_front_h"])
        mean_ratio = surf.expected("total_ratio")
        q05 = surf.quantile("total_ratio", 0.05)
        q95 = surf.quantile("total_ratio", 0.95)
        mean_bcr = surf.expected("bcr")
        mean_rel = surf.expected("reliability")
        curve = []
        for i, h in enumerate(surf.h_grid):
            bcr_val = float(mean_bcr[i])
            curve.append(CurvePoint(
                h=float(h),
                total_ratio_mean=float(mean_ratio[i]),
                total_ratio_q05=float(q05[i]),
                total_ratio_q95=float(q95[i]),
                bcr_mean=None if np.isnan(bcr_val) else bcr_val,
                reliability_mean=float(mean_rel[i]),
                upfront_ratio=float(surf.o1[i]),
                joint_robustness=float(rob.joint_frac[i]),
                reliability_robustness=float(rob.reliability_frac[i]),
                passes_cb_test=bool(not np.isnan(bcr_val) and bcr_val >= 1.0),
                on_pareto_front=bool(float(h) in front),
            ))
        return AnalyzeResponse(
            bfe=report["bfe"],
            house_out_of_range=req.house.out_of_range(),
            h_opt_considering=report["h_opt_considering"],
            h_opt_ignoring=report["h_opt_ignoring"],
            fema_h=report["fema"]["h"],
            fema_feasible=report["fema"]["feasible"],
            strategies=[StrategyOut(**s) for s in report["strategies"]],
            curve=curve,
            pareto_front_h=report["pareto_front_h"],
            workload=Workload(
                ensemble_size=n_sows,
                requested_ensemble_size=requested,
                capped=bool(n_sows < requested),
                n_grid=int(surf.h_grid.size),
                engine_version=__version__,
                artifact_hash=state.artifact_hash,
            ),
        )

    return app
