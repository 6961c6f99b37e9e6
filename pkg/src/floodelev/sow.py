"""State-of-the-world ensembles: joint samples of every uncertain input.

A state of the world (SOW) bundles one GEV posterior draw, one house
lifetime, one simulated discount-rate path, one damage-curve error, and --
under deep switching -- one choice of damage model and discount model
structure. Ensembles are reproducible from (seed, mode, size) alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .discount import Ar3Model, ModelKind, discount_factors_stochastic, \
    path_innovations, simulate_from_innovations
from .exposure import LifetimeDist
from .hazard import GevParams, GevPosterior

DAMAGE_MODELS = ("HAZUS", "JRC")
DISCOUNT_MODEL_ORDER = (
    ModelKind.RANDOM_WALK, ModelKind.MEAN_REVERTING, ModelKind.BACKGROUND_TREND,
)


@dataclass(frozen=True)
class Scenario:
    """One combination of the two deeply uncertain model choices."""

    damage_model: str = "HAZUS"
    discount_model: ModelKind = ModelKind.BACKGROUND_TREND

    def __post_init__(self):
        if self.damage_model not in DAMAGE_MODELS:
            raise ValueError(f"unknown damage model {self.damage_model!r}")


MOST_LIKELY_SCENARIO = Scenario()

ALL_SCENARIOS = tuple(
    Scenario(dm, dk) for dm in DAMAGE_MODELS for dk in DISCOUNT_MODEL_ORDER
)


def lhs_sample(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Latin hypercube sample: an (n, k) matrix in [0, 1).

    Each column holds exactly one uniform draw per stratum [i/n, (i+1)/n),
    in shuffled order.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 dimensions and n >= 1 samples")
    out = np.empty((n, k))
    for j in range(k):
        out[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return out


@dataclass(frozen=True)
class StateOfTheWorld:
    gev: GevParams
    lifetime: int
    rate_path: np.ndarray
    damage_error: float
    scenario: Scenario
    index: int


@dataclass
class SowEnsemble:
    """Columnar ensemble of SOWs plus the derived per-SOW discount sums.

    ``discount_sum[i]`` is the sum of discount factors over years
    0..lifetime[i], the multiplier that turns an annual expected damage into
    a lifetime discounted one.
    """

    mu: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    lifetime: np.ndarray
    damage_error: np.ndarray
    damage_model: np.ndarray      # indices into DAMAGE_MODELS
    discount_model: np.ndarray    # indices into DISCOUNT_MODEL_ORDER
    rate_paths: np.ndarray        # (n, horizon) fractions per year
    discount_sum: np.ndarray
    seed: int
    mode: str                     # "deep" | "fixed"
    scenario: Optional[Scenario] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.mu.size

    def sow_at(self, i: int) -> StateOfTheWorld:
        return StateOfTheWorld(
            gev=GevParams(float(self.mu[i]), float(self.sigma[i]), float(self.xi[i])),
            lifetime=int(self.lifetime[i]),
            rate_path=self.rate_paths[i],
            damage_error=float(self.damage_error[i]),
            scenario=Scenario(DAMAGE_MODELS[self.damage_model[i]],
                              DISCOUNT_MODEL_ORDER[self.discount_model[i]]),
            index=i,
        )

    def scenario_counts(self) -> dict[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for dm_i, dk_i in zip(self.damage_model, self.discount_model):
            key = (DAMAGE_MODELS[dm_i], DISCOUNT_MODEL_ORDER[dk_i].value)
            out[key] = out.get(key, 0) + 1
        return out

    def save(self, csv_path, manifest_path=None):
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "mu", "sigma", "xi", "lifetime", "damage_error",
                        "damage_model", "discount_model", "discount_sum"])
            for i in range(len(self)):
                w.writerow([
                    i, repr(float(self.mu[i])), repr(float(self.sigma[i])),
                    repr(float(self.xi[i])), int(self.lifetime[i]),
                    repr(float(self.damage_error[i])),
                    DAMAGE_MODELS[self.damage_model[i]],
                    DISCOUNT_MODEL_ORDER[self.discount_model[i]].value,
                    repr(float(self.discount_sum[i])),
                ])
        if manifest_path is not None:
            payload = {
                "seed": self.seed,
                "mode": self.mode,
                "scenario": None if self.scenario is None else {
                    "damage_model": self.scenario.damage_model,
                    "discount_model": self.scenario.discount_model.value,
                },
                "size": len(self),
                "horizon": int(self.rate_paths.shape[1]),
            }
            payload.update(self.meta)
            with open(manifest_path, "w") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")


def generate_sows(posterior: GevPosterior,
                  discount_models: dict[ModelKind, Ar3Model],
                  lifetime_dist: LifetimeDist,
                  n: int,
                  mode: str = "deep",
                  seed: int = 0,
                  scenario: Optional[Scenario] = None,
                  damage_error_halfwidth: float = 0.30,
                  horizon: int = 120) -> SowEnsemble:
    """Build an ensemble of ``n`` SOWs.

    GEV draws resample posterior rows uniformly (keeping the parameters'
    joint structure); lifetime and damage error come from a Latin hypercube
    through their inverse CDFs; rate paths are simulated from each SOW's
    discount model with per-index innovation streams. ``mode="deep"``
    switches the damage model uniformly over two choices and the discount
    model uniformly over three; ``mode="fixed"`` pins both to ``scenario``.

    The path horizon stretches beyond ``horizon`` whenever a sampled
    lifetime needs more years, so discount factors always cover year
    0..lifetime.
    """
    if n <= 0:
        raise ValueError("ensemble size must be positive")
    if len(posterior) == 0:
        raise ValueError("posterior is empty")
    if mode not in ("deep", "fixed"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "fixed":
        scenario = scenario or MOST_LIKELY_SCENARIO
        needed = {scenario.discount_model}
    else:
        scenario = None
        needed = set(DISCOUNT_MODEL_ORDER)
    missing = [k.value for k in needed if k not in discount_models]
    if missing:
        raise ValueError(f"missing fitted discount models: {missing}")

    rng = np.random.default_rng(seed)
    unit = lhs_sample(2, n, rng)
    gev_idx = rng.integers(0, len(posterior), size=n)
    if mode == "deep":
        dmg_idx = rng.integers(0, len(DAMAGE_MODELS), size=n)
        disc_idx = rng.integers(0, len(DISCOUNT_MODEL_ORDER), size=n)
    else:
        dmg_idx = np.full(n, DAMAGE_MODELS.index(scenario.damage_model))
        disc_idx = np.full(n, DISCOUNT_MODEL_ORDER.index(scenario.discount_model))

    lifetimes = lifetime_dist.ppf(unit[:, 0])
    damage_error = (2.0 * unit[:, 1] - 1.0) * damage_error_halfwidth
    horizon_eff = int(max(horizon, lifetimes.max() + 1))

    eps = np.stack([path_innovations(seed, i, horizon_eff) for i in range(n)])
    rate_paths = np.empty((n, horizon_eff))
    for k_i, kind in enumerate(DISCOUNT_MODEL_ORDER):
        rows = np.where(disc_idx == k_i)[0]
        if rows.size:
            rate_paths[rows] = simulate_from_innovations(
                discount_models[kind], eps[rows]
            )

    factors = discount_factors_stochastic(rate_paths)
    # sum of F_t for t = 0..lifetime (inclusive) per SOW
    cum = np.concatenate([np.zeros((n, 1)), np.cumsum(factors, axis=1)], axis=1)
    discount_sum = cum[np.arange(n), lifetimes + 1]

    return SowEnsemble(
        mu=posterior.mu[gev_idx].copy(),
        sigma=posterior.sigma[gev_idx].copy(),
        xi=posterior.xi[gev_idx].copy(),
        lifetime=lifetimes.astype(int),
        damage_error=damage_error,
        damage_model=dmg_idx.astype(np.uint8),
        discount_model=disc_idx.astype(np.uint8),
        rate_paths=rate_paths,
        discount_sum=discount_sum,
        seed=seed,
        mode=mode,
        scenario=scenario,
        meta={"damage_error_halfwidth": damage_error_halfwidth},
    )
