"""Batch pipeline: ingest, fits, house analysis, exposure sweep, sensitivity.

Each command reads a single JSON run configuration with explicit seeds,
writes its artifacts under the configured output directory, and records
input/output content hashes in ``manifest.json`` so later stages can verify
they are consuming the artifacts they expect. Outputs carry no timestamps:
rerunning a command with the same configuration reproduces identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, discount, hydro
from .exposure import DepthDamageCurve, ElevationCostModel, House, \
    LifetimeDist, elevation_cost, load_damage_curves
from .hazard import GevParams, GevPosterior, McmcConfig, PriorSpec, \
    base_flood_elevation, map_estimate, mcmc_sample, return_level_summary
from .objectives import EadGrid, IgnoringWorld, ObjectiveSurface, \
    UncertainWorld, default_h_grid, fema_recommendation, optimize_height
from .robustness import AcceptableRanges, domain_measure, pareto_front, \
    tradeoff_export, tradeoff_to_csv
from .sensitivity import DamageModelSpec, HOUSE_PRESETS, damage_sensitivity, \
    ishigami, ishigami_analytic, saltelli_design, sobol_indices, \
    bootstrap_significance
from .sow import MOST_LIKELY_SCENARIO, Scenario, SowEnsemble, generate_sows, \
    lhs_sample
from .discount import ModelKind


class ArtifactError(RuntimeError):
    """Raised when a required pipeline artifact is missing or stale."""


DEFAULT_CONFIG = {
    "data": {
        "discharge_rdb": "data/usgs_01554000_daily_discharge.rdb",
        "rating_curve": "data/rating_curve_01554000.csv",
        "discount_series": "data/discount_rates_1800_2018.csv",
        "damage_curves": "data/damage_curves",
    },
    "output_dir": "runs/default",
    "seeds": {
        "mcmc": 1405,
        "sows": 2021,
        "sweep_sows": 777,
        "house_pool": 4242,
        "sensitivity": 1915,
        "bootstrap": 1916,
    },
    "ingest": {"min_coverage": 0.9, "water_year": False},
    "hazard": {
        "n_samples": 50000,
        "burn_in": 10000,
        "init": [5.0, 1.0, 0.1],
        "prior_sds": [31.62, 10.0, 1.0],
    },
    "discount": {"horizon": 120},
    "exposure": {
        "cost_mode": "step",
        "weibull_shape": 2.8,
        "weibull_scale": 73.5,
        "fixed_lifetime": 30,
        "damage_error_halfwidth": 0.30,
    },
    "analysis": {
        "n_sows": 10000,
        "mode": "deep",
        "scenario_damage_model": "HAZUS",
        "scenario_discount_model": "background_trend",
        "fixed_rate": 0.04,
        "ead_nodes": 257,
        "return_period_min": 1.001,
        "return_period_max": 10000.0,
        "h_step": 0.1,
    },
    "house": {
        "value": 300000.0,
        "size_sqft": 1500.0,
        "floor_rel_bfe": -4.0,
        "label": "sample-house",
    },
    "fema": {"freeboard_ft": 1.5},
    "ranges": {
        "bcr_min": 1.0,
        "total_ratio_max": 0.75,
        "reliability_min": 0.5,
    },
    "sweep": {"n_houses": 1000, "n_sows": 2000},
    "sensitivity": {"n_base": 4096, "n_resamples": 1000, "sampler": "lhs"},
    "service": {
        "default_ensemble": 2000,
        "max_ensemble": 20000,
        "cors_origins": ["*"],
    },
}


def _deep_merge(base: dict, override: dict, path="") -> dict:
    out = dict(base)
    for key, val in override.items():
        if key not in base:
            raise ValueError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _deep_merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


@dataclass
class RunConfig:
    """Resolved run configuration; every default is echoed into manifests."""

    raw: dict
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def load(cls, path=None, overrides: Optional[dict] = None) -> "RunConfig":
        raw = DEFAULT_CONFIG
        base = Path(".")
        if path is not None:
            with open(path) as fh:
                raw = _deep_merge(DEFAULT_CONFIG, json.load(fh))
            base = Path(path).parent
        if overrides:
            raw = _deep_merge(raw, overrides)
        return cls(raw=raw, base_dir=base)

    def __getitem__(self, key):
        return self.raw[key]

    def path(self, key: str) -> Path:
        p = Path(self.raw["data"][key])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        p = Path(self.raw["output_dir"])
        return p if p.is_absolute() else self.base_dir / p

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def ead_grid(self) -> EadGrid:
        a = self.raw["analysis"]
        return EadGrid(t_min=a["return_period_min"], t_max=a["return_period_max"],
                       n_nodes=a["ead_nodes"])

    def h_grid(self) -> np.ndarray:
        return default_h_grid(step=self.raw["analysis"]["h_step"])

    def cost_model(self) -> ElevationCostModel:
        return ElevationCostModel(mode=self.raw["exposure"]["cost_mode"])

    def lifetime_dist(self) -> LifetimeDist:
        e = self.raw["exposure"]
        return LifetimeDist(kind="weibull", shape=e["weibull_shape"],
                            scale=e["weibull_scale"],
                            fixed_years=e["fixed_lifetime"])

    def ranges(self) -> AcceptableRanges:
        r = self.raw["ranges"]
        return AcceptableRanges(bcr_min=r["bcr_min"],
                                total_ratio_max=r["total_ratio_max"],
                                reliability_min=r["reliability_min"])

    def sample_house(self) -> House:
        h = self.raw["house"]
        return House(h["value"], h["size_sqft"], h["floor_rel_bfe"],
                     h.get("label", ""))


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Manifest:
    """Per-run record of stage inputs/outputs (content-hashed)."""

    def __init__(self, out_dir: Path):
        self.path = Path(out_dir) / "manifest.json"
        if self.path.exists():
            with open(self.path) as fh:
                self.data = json.load(fh)
        else:
            self.data = {"package_version": __version__, "stages": {}}

    def record(self, stage: str, config: RunConfig, inputs: list, outputs: list):
        self.data["stages"][stage] = {
            "config_hash": config.config_hash(),
            "inputs": {str(p): sha256_file(p) for p in inputs},
            "outputs": {str(p): sha256_file(p) for p in outputs},
        }
        self.data["package_version"] = __version__
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def verify_artifact(self, stage: str, path: Path):
        """Check that ``path`` is the artifact the named stage produced."""
        entry = self.data["stages"].get(stage)
        if entry is None:
            raise ArtifactError(
                f"stage {stage!r} has not been run; run `floodelev {stage}` first"
            )
        recorded = entry["outputs"].get(str(path))
        if recorded is None:
            raise ArtifactError(f"stage {stage!r} did not produce {path}")
        if not Path(path).exists():
            raise ArtifactError(
                f"artifact {path} is missing; rerun `floodelev {stage}`"
            )
        actual = sha256_file(path)
        if actual != recorded:
            raise ArtifactError(
                f"artifact {path} does not match the manifest hash; "
                f"rerun `floodelev {stage}`"
            )


# --- stage commands -------------------------------------------------------

def cmd_ingest(config: RunConfig) -> hydro.AnnualMaxima:
    """Parse the discharge record, convert to stage, extract annual maxima."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rdb_path = config.path("discharge_rdb")
    rating_path = config.path("rating_curve")
    with open(rdb_path) as fh:
        series = hydro.parse_usgs_rdb(fh.read())
    curve = hydro.RatingCurve.from_csv(rating_path)
    levels = hydro.stage_series(curve, series)
    maxima = hydro.annual_maxima(levels,
                                 min_coverage=config["ingest"]["min_coverage"],
                                 water_year=config["ingest"]["water_year"])
    maxima_path = out / "annual_maxima.csv"
    maxima.to_csv(maxima_path)
    excluded_path = out / "excluded_years.csv"
    with open(excluded_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["year", "coverage"])
        for year, cov in maxima.excluded:
            w.writerow([year, repr(cov)])
    Manifest(out).record("ingest", config, [rdb_path, rating_path],
                         [maxima_path, excluded_path])
    return maxima


def cmd_fit_hazard(config: RunConfig) -> GevPosterior:
    """Sample the GEV posterior for the ingested annual maxima."""
    out = config.out_dir
    maxima_path = out / "annual_maxima.csv"
    Manifest(out).verify_artifact("ingest", maxima_path)
    maxima = hydro.AnnualMaxima.from_csv(maxima_path)
    hz = config["hazard"]
    priors = PriorSpec(*hz["prior_sds"])
    post = mcmc_sample(maxima, priors, McmcConfig(
        n_samples=hz["n_samples"], burn_in=hz["burn_in"],
        init=tuple(hz["init"]), seed=config["seeds"]["mcmc"],
    ))
    post_path = out / "posterior.csv"
    meta_path = out / "posterior_meta.json"
    post.meta["bfe"] = base_flood_elevation(post)
    post.save(post_path, meta_path)
    Manifest(out).record("fit-hazard", config, [maxima_path],
                         [post_path, meta_path])
    return post


def cmd_fit_discount(config: RunConfig) -> dict:
    """Fit the three AR(3) structures and write the selection table."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    series_path = config.path("discount_series")
    series = discount.DiscountSeries.from_csv(series_path)
    fits = discount.fit_all(series)
    table = discount.model_selection_table(series)
    payload = {"selection": table, "models": {}}
    for kind, model in fits.items():
        payload["models"][kind.value] = {
            "kind": kind.value, "rho": list(model.rho), "sigma2": model.sigma2,
            "eta": model.eta, "beta": model.beta, "aic": model.aic,
            "bic": model.bic, "loglik": model.loglik, "n_obs": model.n_obs,
            "stderr": model.stderr, "tail_log": list(model.tail_log),
            "t_next": model.t_next,
        }
    models_path = out / "discount_models.json"
    with open(models_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    Manifest(out).record("fit-discount", config, [series_path], [models_path])
    return payload


def load_discount_models(path) -> dict[ModelKind, discount.Ar3Model]:
    with open(path) as fh:
        payload = json.load(fh)
    out = {}
    for name, d in payload["models"].items():
        out[ModelKind(name)] = discount.Ar3Model(
            kind=ModelKind(name), rho=tuple(d["rho"]), sigma2=d["sigma2"],
            eta=d["eta"], beta=d["beta"], aic=d["aic"], bic=d["bic"],
            loglik=d["loglik"], n_obs=d["n_obs"], stderr=d["stderr"],
            tail_log=tuple(d["tail_log"]), t_next=d["t_next"],
        )
    return out


@dataclass
class EngineBundle:
    """Fitted artifacts plus derived handles shared by CLI and service."""

    config: RunConfig
    posterior: GevPosterior
    models: dict[ModelKind, discount.Ar3Model]
    curves: dict[str, DepthDamageCurve]
    bfe: float
    map_params: GevParams
    _worlds: dict = field(default_factory=dict)

    @classmethod
    def load(cls, config: RunConfig, verify: bool = True) -> "EngineBundle":
        out = config.out_dir
        manifest = Manifest(out)
        post_path = out / "posterior.csv"
        models_path = out / "discount_models.json"
        if verify:
            manifest.verify_artifact("fit-hazard", post_path)
            manifest.verify_artifact("fit-discount", models_path)
        elif not post_path.exists() or not models_path.exists():
            raise ArtifactError(
                "missing fitted artifacts; run `floodelev ingest`, "
                "`floodelev fit-hazard` and `floodelev fit-discount` first"
            )
        posterior = GevPosterior.load(post_path, out / "posterior_meta.json")
        models = load_discount_models(models_path)
        curves = load_damage_curves(config.path("damage_curves"))
        m = map_estimate(posterior)
        return cls(config=config, posterior=posterior, models=models,
                   curves=curves, bfe=base_flood_elevation(m), map_params=m)

    def uncertain_world(self, n_sows: int, seed: int, mode: str = "deep",
                        scenario: Optional[Scenario] = None) -> UncertainWorld:
        key = (n_sows, seed, mode,
               None if scenario is None else (scenario.damage_model,
                                              scenario.discount_model.value))
        if key not in self._worlds:
            if len(self._worlds) >= 8:
                self._worlds.pop(next(iter(self._worlds)))
            ens = generate_sows(
                self.posterior, self.models, self.config.lifetime_dist(),
                n_sows, mode=mode, seed=seed, scenario=scenario,
                damage_error_halfwidth=self.config["exposure"]["damage_error_halfwidth"],
                horizon=self.config["discount"]["horizon"],
            )
            self._worlds[key] = UncertainWorld(
                ens, self.curves, self.bfe, self.config.cost_model(),
                self.config.ead_grid(),
            )
        return self._worlds[key]

    def ignoring_world(self) -> IgnoringWorld:
        return IgnoringWorld(
            self.map_params, self.curves["HAZUS"], self.bfe,
            lifetime=self.config["exposure"]["fixed_lifetime"],
            rate=self.config["analysis"]["fixed_rate"],
            cost_model=self.config.cost_model(), grid=self.config.ead_grid(),
        )


def _strategy_row(name: str, h: float, feasible: bool, house: House,
                  surface: ObjectiveSurface, idx: int, ranges) -> dict:
    mean_ratio = surface.expected("total_ratio")
    mean_bcr = surface.expected("bcr")
    mean_rel = surface.expected("reliability")
    rob = domain_measure(surface, ranges)
    bcr_val = float(mean_bcr[idx])
    return {
        "strategy": name,
        "h": float(h),
        "feasible": bool(feasible),
        "upfront": float(surface.upfront[idx]),
        "upfront_ratio": float(surface.o1[idx]),
        "expected_total": float(surface.expected("total")[idx]),
        "expected_total_ratio": float(mean_ratio[idx]),
        "total_ratio_q05": float(surface.quantile("total_ratio", 0.05)[idx]),
        "total_ratio_q95": float(surface.quantile("total_ratio", 0.95)[idx]),
        "expected_bcr": None if np.isnan(bcr_val) else bcr_val,
        "expected_reliability": float(mean_rel[idx]),
        "joint_robustness": float(rob.joint_frac[idx]),
    }


def analyze_house(bundle: EngineBundle, house: House,
                  n_sows: Optional[int] = None, seed: Optional[int] = None,
                  mode: Optional[str] = None,
                  scenario: Optional[Scenario] = None) -> dict:
    """Full decision report for one house: surfaces, strategies, robustness,
    trade-off front, return levels."""
    config = bundle.config
    n_sows = n_sows or config["analysis"]["n_sows"]
    seed = config["seeds"]["sows"] if seed is None else seed
    mode = mode or config["analysis"]["mode"]
    if mode == "fixed" and scenario is None:
        scenario = Scenario(
            config["analysis"]["scenario_damage_model"],
            ModelKind(config["analysis"]["scenario_discount_model"]),
        )
    ranges = config.ranges()
    world = bundle.uncertain_world(n_sows, seed, mode, scenario)
    ign = bundle.ignoring_world()

    res_cons = optimize_height(house, world, config.h_grid())
    res_ign = optimize_height(house, ign, config.h_grid())
    surf = res_cons.surface
    fema = fema_recommendation(house, config["fema"]["freeboard_ft"],
                               min_h=config.cost_model().min_h)

    strat_h = [0.0, fema.h, res_ign.h_opt, res_cons.h_opt]
    strat_surf = world.surface(house, strat_h)
    ign_surf = ign.surface(house, strat_h)
    names = ["do-nothing", "fema", "optimal-ignoring", "optimal-considering"]
    feas = [True, fema.feasible, True, True]
    strategies = []
    for i, (name, h) in enumerate(zip(names, strat_h)):
        row = _strategy_row(name, h, feas[i], house, strat_surf, i, ranges)
        row["ignoring_total_ratio"] = float(ign_surf.expected("total_ratio")[i])
        ign_bcr = float(ign_surf.expected("bcr")[i])
        row["ignoring_bcr"] = None if np.isnan(ign_bcr) else ign_bcr
        row["ignoring_reliability"] = float(ign_surf.expected("reliability")[i])
        strategies.append(row)

    rob = domain_measure(surf, ranges)
    rows = tradeoff_export(surf)
    pts = [(r.upfront, r.reliability) for r in rows]
    front_idx = pareto_front(pts, senses=("min", "max"))
    return_levels = {
        str(T): vars(return_level_summary(bundle.posterior, T))
        for T in (10, 50, 100, 500)
    }
    return {
        "house": {"value": house.value, "size_sqft": house.size_sqft,
                  "floor_rel_bfe": house.floor_rel_bfe, "label": house.label},
        "bfe": bundle.bfe,
        "mode": mode,
        "n_sows": n_sows,
        "seed": seed,
        "h_opt_considering": res_cons.h_opt,
        "h_opt_ignoring": res_ign.h_opt,
        "fema": {"h": fema.h, "feasible": fema.feasible},
        "strategies": strategies,
        "return_levels": return_levels,
        "surfaces": {"considering": surf, "ignoring": res_ign.surface},
        "robustness": rob,
        "tradeoff": rows,
        "pareto_front_h": [float(surf.h_grid[i]) for i in front_idx],
    }


def _report_json(report: dict) -> dict:
    """The JSON-serializable subset of an analyze report."""
    return {k: v for k, v in report.items()
            if k not in ("surfaces", "robustness", "tradeoff")}


def cmd_analyze_house(config: RunConfig, house: Optional[House] = None) -> dict:
    out = config.out_dir / "analyze"
    out.mkdir(parents=True, exist_ok=True)
    bundle = EngineBundle.load(config)
    house = house or config.sample_house()
    report = analyze_house(bundle, house)
    surf = report["surfaces"]["considering"]
    surf_ign = report["surfaces"]["ignoring"]
    surf.to_csv(out / "surface_considering.csv")
    surf_ign.to_csv(out / "surface_ignoring.csv")
    report["robustness"].to_csv(out / "robustness.csv")
    tradeoff_to_csv(report["tradeoff"], out / "tradeoff.csv")
    with open(out / "report.json", "w") as fh:
        json.dump(_report_json(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    Manifest(config.out_dir).record(
        "analyze", config,
        [config.out_dir / "posterior.csv", config.out_dir / "discount_models.json"],
        [out / "surface_considering.csv", out / "surface_ignoring.csv",
         out / "robustness.csv", out / "tradeoff.csv", out / "report.json"],
    )
    return report


def house_pool(n: int, seed: int) -> list[House]:
    """Hypothetical exposure pool: LHS over value, size, floor elevation."""
    u = lhs_sample(3, n, np.random.default_rng(seed))
    houses = []
    for i in range(n):
        houses.append(House(
            value=10_000 + u[i, 0] * 990_000,
            size_sqft=100 + u[i, 1] * 4_900,
            floor_rel_bfe=-10 + u[i, 2] * 10,
            label=f"house-{i:04d}",
        ))
    return houses


def cmd_sweep_houses(config: RunConfig, progress=None) -> dict:
    """Optimal lifts, FEMA comparison, and cost-benefit flags for the pool.

    The FEMA cost-benefit flag follows the conventional point-estimate CBA
    (best-guess hazard, fixed lifetime and rate); the ensemble-mean flag is
    also exported per house.
    """
    out = config.out_dir / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    bundle = EngineBundle.load(config)
    sw = config["sweep"]
    world = bundle.uncertain_world(sw["n_sows"], config["seeds"]["sweep_sows"],
                                   config["analysis"]["mode"])
    ign = bundle.ignoring_world()
    houses = house_pool(sw["n_houses"], config["seeds"]["house_pool"])
    cost_model = config.cost_model()
    h_grid = config.h_grid()

    rows = []
    for i, house in enumerate(houses):
        res = optimize_height(house, world, h_grid)
        res_ign = optimize_height(house, ign, h_grid)
        fema = fema_recommendation(house, config["fema"]["freeboard_ft"],
                                   min_h=cost_model.min_h)
        pair = world.surface(house, [0.0, fema.h])
        pair_ign = ign.surface(house, [0.0, fema.h])
        fema_bcr_cons = float(pair.expected("bcr")[1])
        fema_bcr_point = float(pair_ign.expected("bcr")[1])
        if res.h_opt > 0:
            opt_bcr = float(res.surface.expected("bcr")[
                res.surface.index_of(res.h_opt)])
        else:
            opt_bcr = float("nan")
        rows.append({
            "label": house.label,
            "value": house.value,
            "size_sqft": house.size_sqft,
            "floor_rel_bfe": house.floor_rel_bfe,
            "h_opt": res.h_opt,
            "h_opt_ignoring": res_ign.h_opt,
            "h_fema": fema.h,
            "fema_feasible": fema.feasible,
            "expected_total_ratio_opt": res.expected_total / house.value,
            "opt_bcr": opt_bcr,
            "fema_bcr": fema_bcr_point,
            "fema_bcr_considering": fema_bcr_cons,
            "opt_passes_cb": bool(res.h_opt > 0 and opt_bcr >= 1.0),
            "fema_passes_cb": bool(fema_bcr_point >= 1.0),
        })
        if progress and (i + 1) % 100 == 0:
            progress(i + 1, len(houses))

    n = len(rows)
    summary = {
        "n_houses": n,
        "share_opt_above_fema": sum(r["h_opt"] > r["h_fema"] for r in rows) / n,
        "share_zero_opt": sum(r["h_opt"] == 0 for r in rows) / n,
        "share_fema_passes_cb": sum(r["fema_passes_cb"] for r in rows) / n,
        "share_fema_passes_cb_considering":
            sum(r["fema_bcr_considering"] >= 1.0 for r in rows) / n,
        "share_opt_below_fema":
            sum(0 < r["h_opt"] < r["h_fema"] for r in rows) / n,
        "all_nonzero_opt_pass_cb":
            all(r["opt_passes_cb"] for r in rows if r["h_opt"] > 0),
        "mean_opt_minus_fema":
            float(np.mean([r["h_opt"] - r["h_fema"] for r in rows])),
        "share_ignoring_lower":
            sum(r["h_opt_ignoring"] <= r["h_opt"] for r in rows) / n,
    }
    houses_path = out / "houses.csv"
    with open(houses_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating))
                            else v) for k, v in r.items()})
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    Manifest(config.out_dir).record(
        "sweep", config,
        [config.out_dir / "posterior.csv", config.out_dir / "discount_models.json"],
        [houses_path, summary_path],
    )
    return {"rows": rows, "summary": summary}


SENSITIVITY_VARIANTS = ("most-likely", "all-scenarios", "deep", "fixed-rate",
                        "exposure", "ishigami")


def cmd_sensitivity(config: RunConfig, variant: str = "most-likely") -> list:
    """Sobol' sensitivity of lifetime expected damages, per variant."""
    out = config.out_dir / "sensitivity"
    out.mkdir(parents=True, exist_ok=True)
    sens = config["sensitivity"]
    seed = config["seeds"]["sensitivity"]
    boot_seed = config["seeds"]["bootstrap"]

    if variant == "ishigami":
        design = saltelli_design(3, sens["n_base"], seed=seed,
                                 sampler=sens["sampler"])
        y = ishigami(design.evaluation_matrix())
        idx = sobol_indices(design, y, ["x1", "x2", "x3"])
        idx = bootstrap_significance(design, y, sens["n_resamples"],
                                     seed=boot_seed, indices=idx)
        path = out / "indices_ishigami.csv"
        idx.to_csv(path)
        analytic = ishigami_analytic()
        with open(out / "ishigami_reference.json", "w") as fh:
            json.dump(analytic, fh, indent=2, sort_keys=True)
            fh.write("\n")
        Manifest(config.out_dir).record("sensitivity", config, [],
                                        [path, out / "ishigami_reference.json"])
        return [("ishigami", idx)]

    bundle = EngineBundle.load(config)
    life = config.lifetime_dist()
    halfwidth = config["exposure"]["damage_error_halfwidth"]

    def run(tag, **kw):
        spec = DamageModelSpec(
            posterior=bundle.posterior, discount_models=bundle.models,
            curves=bundle.curves, bfe=bundle.bfe, lifetime_dist=life,
            damage_error_halfwidth=halfwidth, grid=config.ead_grid(),
            driver_seed=seed, **kw)
        idx = damage_sensitivity(spec, n=sens["n_base"], seed=seed,
                                 sampler=sens["sampler"],
                                 n_resamples=sens["n_resamples"],
                                 bootstrap_seed=boot_seed)
        path = out / f"indices_{tag}.csv"
        idx.to_csv(path)
        return tag, idx, path

    house = config.sample_house()
    results, outputs = [], []
    if variant == "most-likely":
        tag, idx, path = run("most_likely", house=house, variant="scenario")
        results.append((tag, idx)); outputs.append(path)
    elif variant == "all-scenarios":
        for dm in ("HAZUS", "JRC"):
            for dk in ModelKind:
                tag, idx, path = run(f"scenario_{dm.lower()}_{dk.value}",
                                     house=house, variant="scenario",
                                     scenario_damage_model=dm,
                                     scenario_discount_model=dk)
                results.append((tag, idx)); outputs.append(path)
    elif variant == "deep":
        tag, idx, path = run("deep", house=house, variant="deep")
        results.append((tag, idx)); outputs.append(path)
    elif variant == "fixed-rate":
        tag, idx, path = run("fixed_rate", house=house, variant="fixed_rate")
        results.append((tag, idx)); outputs.append(path)
    elif variant == "exposure":
        for name, preset in HOUSE_PRESETS.items():
            tag, idx, path = run(f"exposure_{name}", house=preset,
                                 variant="scenario")
            results.append((tag, idx)); outputs.append(path)
    else:
        raise ValueError(f"unknown sensitivity variant {variant!r}; "
                         f"choose from {SENSITIVITY_VARIANTS}")
    Manifest(config.out_dir).record(
        "sensitivity", config, [config.out_dir / "posterior.csv"], outputs)
    return results


def cmd_robustness(config: RunConfig) -> dict:
    """Standalone satisficing scores for the sample house (also part of
    the analyze report)."""
    out = config.out_dir / "analyze"
    out.mkdir(parents=True, exist_ok=True)
    bundle = EngineBundle.load(config)
    house = config.sample_house()
    world = bundle.uncertain_world(config["analysis"]["n_sows"],
                                   config["seeds"]["sows"],
                                   config["analysis"]["mode"])
    surf = world.surface(house, config.h_grid())
    rob = domain_measure(surf, config.ranges())
    rob.to_csv(out / "robustness.csv")
    rows = tradeoff_export(surf)
    tradeoff_to_csv(rows, out / "tradeoff.csv")
    Manifest(config.out_dir).record(
        "robustness", config, [config.out_dir / "posterior.csv"],
        [out / "robustness.csv", out / "tradeoff.csv"])
    return {"robustness": rob, "tradeoff": rows}


def cmd_export_plots(config: RunConfig) -> list:
    """Re-emit plot-ready data files from existing analyze artifacts."""
    src = config.out_dir / "analyze"
    for name in ("surface_considering.csv", "surface_ignoring.csv",
                 "robustness.csv", "tradeoff.csv"):
        if not (src / name).exists():
            raise ArtifactError(
                f"missing {src / name}; run `floodelev analyze` first")
    out = config.out_dir / "plots"
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def read_rows(path):
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))

    cons = read_rows(src / "surface_considering.csv")
    ign = read_rows(src / "surface_ignoring.csv")
    cost_path = out / "cost_curve.csv"
    with open(cost_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "ratio_mean_considering", "ratio_q05", "ratio_q95",
                    "ratio_ignoring"])
        for rc, ri in zip(cons, ign):
            w.writerow([rc["h"], rc["o2_ratio_mean"], rc["o2_ratio_q05"],
                        rc["o2_ratio_q95"], ri["o2_ratio_mean"]])
    written.append(cost_path)

    rob_path = out / "robustness_curves.csv"
    with open(src / "robustness.csv") as fin, open(rob_path, "w") as fout:
        fout.write(fin.read())
    written.append(rob_path)

    rows = read_rows(src / "tradeoff.csv")
    front_path = out / "tradeoff_front.csv"
    with open(front_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "upfront", "reliability", "passes_cb_test"])
        for r in rows:
            w.writerow([r["h"], r["upfront"], r["reliability"],
                        r["passes_cb_test"]])
    written.append(front_path)
    Manifest(config.out_dir).record(
        "export-plots", config,
        [src / "surface_considering.csv", src / "surface_ignoring.csv",
         src / "robustness.csv", src / "tradeoff.csv"],
        written)
    return written
