import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from floodelev.hazard import return_level_summary
from floodelev.pipeline import (EngineBundle, RunConfig, cmd_analyze_house,
                                cmd_fit_discount, cmd_fit_hazard, cmd_ingest)
from floodelev.service import create_app

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="module")
def service_run(tmp_path_factory):
    cfg = RunConfig.load(overrides={
        "output_dir": str(tmp_path_factory.mktemp("svc")),
        "hazard": {"n_samples": 1500, "burn_in": 900},
        "analysis": {"n_sows": 200},
        "service": {"default_ensemble": 200, "max_ensemble": 400},
    })
    cfg.raw["data"] = {k: str(DATA / Path(v).name)
                       for k, v in cfg.raw["data"].items()}
    cmd_ingest(cfg)
    cmd_fit_hazard(cfg)
    cmd_fit_discount(cfg)
    return cfg


@pytest.fixture(scope="module")
def client(service_run):
    app = create_app(service_run)
    with TestClient(app) as c:
        yield c


def sample_request(seed=77, n=200, **house_overrides):
    house = {"value": 300_000, "size_sqft": 1500, "floor_rel_bfe": -4.0,
             "label": "svc-test"}
    house.update(house_overrides)
    return {"house": house,
            "options": {"seed": seed, "ensemble_size": n}}


class TestMeta:
    def test_meta_fields(self, client, service_run):
        r = client.get("/api/meta")
        assert r.status_code == 200
        body = r.json()
        assert body["config_hash"] == service_run.config_hash()
        assert body["posterior_size"] == 1500
        assert body["posterior_seed"] == service_run["seeds"]["mcmc"]
        assert body["default_ensemble"] == 200
        assert sorted(body["discount_models"]) == [
            "background_trend", "mean_reverting", "random_walk"]

    def test_not_ready_returns_503(self, service_run):
        app = create_app(service_run)
        # outside the lifespan context the startup hook never runs, so the
        # artifact bundle is absent
        plain = TestClient(app)
        assert plain.get("/api/meta").status_code == 503
        assert plain.get("/api/hazard/summary").status_code == 503


class TestHazardSummary:
    def test_matches_recomputation(self, client, service_run):
        r = client.get("/api/hazard/summary")
        assert r.status_code == 200
        body = r.json()
        bundle = EngineBundle.load(service_run)
        for row in body["return_levels"]:
            ref = return_level_summary(bundle.posterior, row["period"])
            assert row["map_level"] == pytest.approx(ref.map_level)
            assert row["mean_level"] == pytest.approx(ref.mean_level)
        assert body["bfe"] == pytest.approx(bundle.bfe)
        assert [row["period"] for row in body["return_levels"]] == \
               [10, 50, 100, 500]


class TestAnalyze:
    def test_validation_errors_are_400_with_fields(self, client):
        req = sample_request()
        req["house"]["value"] = -5
        r = client.post("/api/analyze", json=req)
        assert r.status_code == 400
        fields = [e["field"] for e in r.json()["errors"]]
        assert any("value" in f for f in fields)

    def test_missing_seed_rejected(self, client):
        r = client.post("/api/analyze", json={
            "house": {"value": 1e5, "size_sqft": 1000, "floor_rel_bfe": -2},
            "options": {}})
        assert r.status_code == 400
        assert any("seed" in e["field"] for e in r.json()["errors"])

    def test_unknown_field_rejected(self, client):
        req = sample_request()
        req["house"]["vallue"] = 1
        assert client.post("/api/analyze", json=req).status_code == 400

    def test_byte_identical_responses(self, client):
        req = sample_request(seed=123)
        a = client.post("/api/analyze", json=req)
        b = client.post("/api/analyze", json=req)
        assert a.status_code == 200
        assert a.content == b.content

    def test_matches_cli_strategy_table(self, client, service_run):
        # same seed, ensemble size and mode as the batch command
        cfg = service_run
        report = cmd_analyze_house(cfg)
        req = sample_request(seed=cfg["seeds"]["sows"],
                             n=cfg["analysis"]["n_sows"])
        req["house"]["label"] = cfg.sample_house().label
        r = client.post("/api/analyze", json=req)
        assert r.status_code == 200
        got = r.json()
        assert got["h_opt_considering"] == report["h_opt_considering"]
        assert got["h_opt_ignoring"] == report["h_opt_ignoring"]
        for mine, ref in zip(got["strategies"], report["strategies"]):
            assert mine["strategy"] == ref["strategy"]
            assert mine["expected_total"] == pytest.approx(
                ref["expected_total"], rel=1e-12)
            if ref["expected_bcr"] is None:
                assert mine["expected_bcr"] is None
            else:
                assert mine["expected_bcr"] == pytest.approx(
                    ref["expected_bcr"], rel=1e-12)
            assert mine["joint_robustness"] == pytest.approx(
                ref["joint_robustness"])

    def test_tiny_hazard_house_prefers_zero(self, client):
        # floor at the BFE: flooding is rare, lifting never pays
        req = sample_request(floor_rel_bfe=0.0, value=50_000, size_sqft=4000)
        r = client.post("/api/analyze", json=req)
        assert r.status_code == 200
        assert r.json()["h_opt_considering"] == 0.0
        assert r.json()["h_opt_ignoring"] == 0.0

    def test_ensemble_cap_flagged(self, client):
        req = sample_request(n=100_000)
        r = client.post("/api/analyze", json=req)
        assert r.status_code == 200
        w = r.json()["workload"]
        assert w["capped"] is True
        assert w["ensemble_size"] == 400
        assert w["requested_ensemble_size"] == 100_000

    def test_out_of_range_house_flagged_not_rejected(self, client):
        req = sample_request(value=5_000_000.0)
        r = client.post("/api/analyze", json=req)
        assert r.status_code == 200
        assert r.json()["house_out_of_range"] == ["value"]

    def test_curve_and_front_consistency(self, client):
        r = client.post("/api/analyze", json=sample_request(seed=5))
        body = r.json()
        curve = body["curve"]
        assert len(curve) == body["workload"]["n_grid"]
        front_h = set(body["pareto_front_h"])
        for pt in curve:
            assert pt["on_pareto_front"] == (pt["h"] in front_h)
            if pt["bcr_mean"] is None:
                assert not pt["passes_cb_test"]
        opt = body["h_opt_considering"]
        totals = {pt["h"]: pt["total_ratio_mean"] for pt in curve}
        assert totals[opt] == min(totals.values())
