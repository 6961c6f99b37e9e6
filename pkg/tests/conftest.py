"""Shared fixtures: reduced-size fits for unit tests, full-size for acceptance."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from floodelev.discount import DiscountSeries, fit_all
from floodelev.exposure import load_damage_curves
from floodelev.hazard import McmcConfig, PriorSpec, mcmc_sample
from floodelev.pipeline import RunConfig, cmd_fit_discount, cmd_fit_hazard, \
    cmd_ingest

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"


@pytest.fixture(scope="session")
def repo_config(tmp_path_factory) -> RunConfig:
    """Config pointing at the bundled dataset, writing to a session tmp dir."""
    out = tmp_path_factory.mktemp("run")
    cfg = RunConfig.load(overrides={"output_dir": str(out)})
    cfg.raw["data"] = {k: str(DATA / Path(v).name)
                       for k, v in cfg.raw["data"].items()}
    return cfg


@pytest.fixture(scope="session")
def fitted_run(repo_config):
    """Ingest + full-size hazard and discount fits on the bundled data."""
    maxima = cmd_ingest(repo_config)
    posterior = cmd_fit_hazard(repo_config)
    discount_payload = cmd_fit_discount(repo_config)
    return {"config": repo_config, "maxima": maxima, "posterior": posterior,
            "discount": discount_payload}


@pytest.fixture(scope="session")
def shipped_maxima(repo_config):
    return cmd_ingest(repo_config)


@pytest.fixture(scope="session")
def small_posterior():
    """Reduced-size posterior on synthetic data for engine unit tests."""
    rng = np.random.default_rng(7)
    data = stats.genextreme(c=-0.15, loc=16.0, scale=2.5).rvs(
        size=80, random_state=rng)
    return mcmc_sample(data, PriorSpec(),
                       McmcConfig(n_samples=4000, burn_in=2000, seed=11))


@pytest.fixture(scope="session")
def discount_models():
    series = DiscountSeries.from_csv(DATA / "discount_rates_1800_2018.csv")
    return fit_all(series)


@pytest.fixture(scope="session")
def damage_curves():
    return load_damage_curves(DATA / "damage_curves")
