"""Variance-based global sensitivity analysis of lifetime expected damages.

Sampling follows the radial two-matrix scheme that yields first-, second-,
and total-order Sobol' indices from n(2k+2) model evaluations: base
matrices A and B plus, for every factor j, A with column j swapped from B
and B with column j swapped from A. Estimators reuse both symmetric
pairings to cut Monte Carlo noise; total-order effects use the squared-
difference (Jansen) form. Significance is judged by bootstrap percentile
intervals over the sample rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .discount import Ar3Model, ModelKind, path_innovations, \
    simulate_from_innovations
from .exposure import DepthDamageCurve, House, LifetimeDist
from .hazard import GevPosterior, _quantile_arr
from .objectives import EadGrid
from .sow import DAMAGE_MODELS, DISCOUNT_MODEL_ORDER, lhs_sample


@dataclass
class SaltelliDesign:
    """Two base sample matrices and the column-swapped evaluation blocks."""

    k: int
    n: int
    a: np.ndarray  # (n, k)
    b: np.ndarray  # (n, k)

    @property
    def n_evaluations(self) -> int:
        return self.n * (2 * self.k + 2)

    def evaluation_matrix(self) -> np.ndarray:
        """All points to evaluate, stacked (A, B, AB_j..., BA_j...)."""
        blocks = [self.a, self.b]
        for j in range(self.k):
            ab = self.a.copy()
            ab[:, j] = self.b[:, j]
            blocks.append(ab)
        for j in range(self.k):
            ba = self.b.copy()
            ba[:, j] = self.a[:, j]
            blocks.append(ba)
        return np.vstack(blocks)

    def split_outputs(self, y: np.ndarray):
        y = np.asarray(y, dtype=float)
        if y.size != self.n_evaluations:
            raise ValueError(
                f"expected {self.n_evaluations} outputs, got {y.size}"
            )
        n, k = self.n, self.k
        ya = y[:n]
        yb = y[n:2 * n]
        yab = y[2 * n:(2 + k) * n].reshape(k, n)
        yba = y[(2 + k) * n:].reshape(k, n)
        return ya, yb, yab, yba


def saltelli_design(k: int, n: int, seed: int = 0,
                    sampler: str = "lhs") -> SaltelliDesign:
    """Build the radial design on the unit hypercube; n(2k+2) points total."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 factors and n >= 1 base samples")
    rng = np.random.default_rng(seed)
    if sampler == "lhs":
        a = lhs_sample(k, n, rng)
        b = lhs_sample(k, n, rng)
    elif sampler == "random":
        a = rng.random((n, k))
        b = rng.random((n, k))
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    return SaltelliDesign(k=k, n=n, a=a, b=b)


@dataclass
class SobolIndices:
    """Estimated indices with raw and display (clamped) values."""

    factor_names: list[str]
    first_raw: np.ndarray            # (k,)
    total_raw: np.ndarray            # (k,)
    second_raw: dict[tuple[int, int], float]
    variance: float
    degenerate: bool = False
    first_ci: Optional[np.ndarray] = None        # (k, 2)
    total_ci: Optional[np.ndarray] = None
    second_ci: Optional[dict[tuple[int, int], tuple[float, float]]] = None
    first_significant: Optional[np.ndarray] = None
    total_significant: Optional[np.ndarray] = None
    second_significant: Optional[dict[tuple[int, int], bool]] = None

    @property
    def k(self) -> int:
        return len(self.factor_names)

    @property
    def first(self) -> np.ndarray:
        return np.clip(self.first_raw, 0.0, 1.0)

    @property
    def total(self) -> np.ndarray:
        return np.clip(self.total_raw, 0.0, 1.0)

    @property
    def second(self) -> dict[tuple[int, int], float]:
        return {p: float(np.clip(v, 0.0, 1.0)) for p, v in self.second_raw.items()}

    def top_first_order(self) -> str:
        return self.factor_names[int(np.argmax(self.first_raw))]

    def top_second_order(self) -> tuple[str, str]:
        pair = max(self.second_raw, key=lambda p: self.second_raw[p])
        return (self.factor_names[pair[0]], self.factor_names[pair[1]])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["factor_or_pair", "order", "estimate", "ci_lo", "ci_hi",
                        "significant"])
            for i, name in enumerate(self.factor_names):
                ci = self.first_ci[i] if self.first_ci is not None else (float("nan"),) * 2
                sig = "" if self.first_significant is None else int(self.first_significant[i])
                w.writerow([name, 1, repr(float(self.first_raw[i])),
                            repr(float(ci[0])), repr(float(ci[1])), sig])
            for (i, j), v in sorted(self.second_raw.items()):
                ci = (self.second_ci or {}).get((i, j), (float("nan"),) * 2)
                sig = "" if self.second_significant is None else int(
                    self.second_significant[(i, j)])
                w.writerow([f"{self.factor_names[i]}*{self.factor_names[j]}", 2,
                            repr(float(v)), repr(float(ci[0])), repr(float(ci[1])), sig])
            for i, name in enumerate(self.factor_names):
                ci = self.total_ci[i] if self.total_ci is not None else (float("nan"),) * 2
                sig = "" if self.total_significant is None else int(self.total_significant[i])
                w.writerow([name, "total", repr(float(self.total_raw[i])),
                            repr(float(ci[0])), repr(float(ci[1])), sig])


def _estimate(ya, yb, yab, yba, k):
    """Normalized index estimates from output blocks.

    Returns (raw output variance, S_j, ST_j, closed S_jk). Outputs are
    standardized first, which leaves the variance ratios unchanged but keeps
    the product estimators well conditioned when the output mean is large.
    """
    allv = np.concatenate([ya, yb])
    variance = float(allv.var())
    # relative floor: numerically constant output has no variance to decompose
    if variance <= 1e-24 * (1.0 + float(allv.mean()) ** 2):
        return 0.0, np.zeros(k), np.zeros(k), {}
    m0, s0 = allv.mean(), math.sqrt(variance)
    za, zb = (ya - m0) / s0, (yb - m0) / s0
    zab, zba = (yab - m0) / s0, (yba - m0) / s0
    # cross-product estimate of the squared mean cancels shared noise
    f02 = (za * zb).mean()
    # standardized variance is exactly one by construction
    sj = 0.5 * ((za * zba).mean(axis=1) + (zb * zab).mean(axis=1)) - f02
    stj = 0.25 * (((za[None, :] - zab) ** 2).mean(axis=1)
                  + ((zb[None, :] - zba) ** 2).mean(axis=1))
    closed = {}
    for i in range(k):
        for j in range(i + 1, k):
            closed[(i, j)] = float(0.5 * ((zba[i] * zab[j]).mean()
                                          + (zba[j] * zab[i]).mean()) - f02)
    return variance, sj, stj, closed


def sobol_indices(design: SaltelliDesign, outputs,
                  factor_names: Optional[list[str]] = None) -> SobolIndices:
    """First-, second-, and total-order Sobol' indices for one output set."""
    ya, yb, yab, yba = design.split_outputs(outputs)
    if not np.all(np.isfinite(ya)) or not np.all(np.isfinite(yb)) \
            or not np.all(np.isfinite(yab)) or not np.all(np.isfinite(yba)):
        raise ValueError("outputs must be finite")
    names = factor_names or [f"x{j + 1}" for j in range(design.k)]
    variance, first, total, closed = _estimate(ya, yb, yab, yba, design.k)
    if variance <= 0:
        pairs = [(i, j) for i in range(design.k) for j in range(i + 1, design.k)]
        return SobolIndices(
            factor_names=names,
            first_raw=np.full(design.k, np.nan),
            total_raw=np.full(design.k, np.nan),
            second_raw={p: float("nan") for p in pairs},
            variance=0.0, degenerate=True,
        )
    second = {
        p: float(c - first[p[0]] - first[p[1]]) for p, c in closed.items()
    }
    return SobolIndices(
        factor_names=names, first_raw=first, total_raw=total,
        second_raw=second, variance=variance,
    )


def bootstrap_significance(design: SaltelliDesign, outputs,
                           n_resamples: int = 1000, level: float = 0.95,
                           seed: int = 0,
                           indices: Optional[SobolIndices] = None) -> SobolIndices:
    """Percentile bootstrap over sample rows; an index is significant when
    its interval excludes zero."""
    if n_resamples < 100:
        raise ValueError("need at least 100 bootstrap resamples")
    ya, yb, yab, yba = design.split_outputs(outputs)
    result = indices or sobol_indices(design, outputs)
    if result.degenerate:
        result.first_significant = np.zeros(design.k, dtype=bool)
        result.total_significant = np.zeros(design.k, dtype=bool)
        result.second_significant = {p: False for p in result.second_raw}
        return result

    k, n = design.k, design.n
    rng = np.random.default_rng(seed)
    alpha = (1.0 - level) / 2.0
    firsts = np.empty((n_resamples, k))
    totals = np.empty((n_resamples, k))
    pairs = sorted(result.second_raw)
    seconds = np.empty((n_resamples, len(pairs)))
    for b in range(n_resamples):
        idx = rng.integers(0, n, size=n)
        variance, first, total, closed = _estimate(
            ya[idx], yb[idx], yab[:, idx], yba[:, idx], k)
        if variance <= 0:
            firsts[b] = np.nan
            totals[b] = np.nan
            seconds[b] = np.nan
            continue
        firsts[b] = first
        totals[b] = total
        seconds[b] = [closed[p] - first[p[0]] - first[p[1]] for p in pairs]

    def ci(mat):
        return np.stack([np.nanquantile(mat, alpha, axis=0),
                         np.nanquantile(mat, 1 - alpha, axis=0)], axis=1)

    result.first_ci = ci(firsts)
    result.total_ci = ci(totals)
    sec_ci = ci(seconds)
    result.second_ci = {p: (float(sec_ci[m, 0]), float(sec_ci[m, 1]))
                        for m, p in enumerate(pairs)}
    result.first_significant = result.first_ci[:, 0] > 0.0
    result.total_significant = result.total_ci[:, 0] > 0.0
    result.second_significant = {
        p: bool(result.second_ci[p][0] > 0.0) for p in pairs
    }
    return result


def ishigami(x: np.ndarray, a: float = 7.0, b: float = 0.1) -> np.ndarray:
    """Ishigami test function on [0,1)^3 rescaled to (-pi, pi)^3."""
    z = (np.asarray(x) * 2.0 - 1.0) * math.pi
    return (np.sin(z[:, 0]) + a * np.sin(z[:, 1]) ** 2
            + b * z[:, 2] ** 4 * np.sin(z[:, 0]))


def ishigami_analytic(a: float = 7.0, b: float = 0.1) -> dict:
    """Closed-form Ishigami indices used as the estimator oracle."""
    pi4 = math.pi ** 4
    v1 = 0.5 * (1.0 + b * pi4 / 5.0) ** 2
    v2 = a ** 2 / 8.0
    v13 = b ** 2 * math.pi ** 8 * 8.0 / 225.0
    v = v1 + v2 + v13
    return {
        "S1": v1 / v, "S2": v2 / v, "S3": 0.0,
        "ST1": (v1 + v13) / v, "ST2": v2 / v, "ST3": v13 / v,
        "variance": v,
    }


# --- lifetime-expected-damage model wrapper ------------------------------

SCENARIO_FACTORS = ["gev_mu", "gev_sigma", "gev_xi", "lifetime",
                    "discount_driver", "damage_error"]
DEEP_FACTORS = SCENARIO_FACTORS + ["damage_model", "discount_model"]
FIXED_RATE_FACTORS = ["gev_mu", "gev_sigma", "gev_xi", "lifetime",
                      "discount_rate", "damage_error"]

HOUSE_PRESETS = {
    "base": House(300_000.0, 1_500.0, -4.0, "base"),
    "small": House(300_000.0, 500.0, -4.0, "small"),
    "large": House(300_000.0, 3_000.0, -4.0, "large"),
    "cheap": House(100_000.0, 1_500.0, -4.0, "cheap"),
    "expensive": House(600_000.0, 1_500.0, -4.0, "expensive"),
    "shallow": House(300_000.0, 1_500.0, -1.0, "shallow"),
    "deep": House(300_000.0, 1_500.0, -8.0, "deep"),
}


@dataclass
class DamageModelSpec:
    """Everything needed to evaluate lifetime expected damages on the cube."""

    posterior: GevPosterior
    discount_models: dict[ModelKind, Ar3Model]
    curves: dict[str, DepthDamageCurve]
    house: House
    bfe: float
    lifetime_dist: LifetimeDist = field(default_factory=LifetimeDist)
    damage_error_halfwidth: float = 0.30
    variant: str = "scenario"        # "scenario" | "deep" | "fixed_rate"
    scenario_damage_model: str = "HAZUS"
    scenario_discount_model: ModelKind = ModelKind.BACKGROUND_TREND
    rate_range: tuple[float, float] = (0.01, 0.10)
    driver_seed: int = 0
    grid: EadGrid = field(default_factory=EadGrid)

    @property
    def factor_names(self) -> list[str]:
        return {"scenario": SCENARIO_FACTORS,
                "deep": DEEP_FACTORS,
                "fixed_rate": FIXED_RATE_FACTORS}[self.variant]

    def evaluate(self, u: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Lifetime expected damages for each hypercube row of ``u``."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.empty(u.shape[0])
        for lo in range(0, u.shape[0], chunk):
            out[lo:lo + chunk] = self._evaluate_chunk(u[lo:lo + chunk])
        return out

    def _evaluate_chunk(self, u: np.ndarray) -> np.ndarray:
        m = u.shape[0]
        mu = np.quantile(self.posterior.mu, u[:, 0])
        sigma = np.quantile(self.posterior.sigma, u[:, 1])
        xi = np.quantile(self.posterior.xi, u[:, 2])
        lifetime = self.lifetime_dist.ppf(u[:, 3])
        err = (2.0 * u[:, 5] - 1.0) * self.damage_error_halfwidth

        p = self.grid.exceedance
        levels = _quantile_arr(mu[:, None], sigma[:, None], xi[:, None],
                               (1.0 - p)[None, :])
        depth = (levels - self.bfe) - self.house.floor_rel_bfe
        if self.variant == "deep":
            dmg_idx = np.minimum((u[:, 6] * len(DAMAGE_MODELS)).astype(int),
                                 len(DAMAGE_MODELS) - 1)
        else:
            dmg_idx = np.full(m, DAMAGE_MODELS.index(self.scenario_damage_model))
        frac = np.empty_like(depth)
        for i, mid in enumerate(DAMAGE_MODELS):
            rows = np.flatnonzero(dmg_idx == i)
            if rows.size:
                curve = self.curves[mid]
                frac[rows] = np.interp(depth[rows], curve.depths_ft,
                                       curve.fractions, left=0.0,
                                       right=float(curve.fractions[-1]))
        frac = np.clip(frac * np.clip(1.0 + err, 0.0, None)[:, None], 0.0, 1.0)
        ead = np.trapezoid(frac, p, axis=1) * self.house.value

        horizon = int(lifetime.max() + 1)
        t = np.arange(1, horizon + 1, dtype=float)
        if self.variant == "fixed_rate":
            lo, hi = self.rate_range
            rates = lo + (hi - lo) * u[:, 4]
            factors = np.exp(-rates[:, None] * t[None, :])
        else:
            stream = np.floor(u[:, 4] * 2 ** 31).astype(np.int64)
            eps = np.stack([
                path_innovations(self.driver_seed, int(s), horizon)
                for s in stream
            ])
            if self.variant == "deep":
                disc_idx = np.minimum(
                    (u[:, 7] * len(DISCOUNT_MODEL_ORDER)).astype(int),
                    len(DISCOUNT_MODEL_ORDER) - 1)
            else:
                disc_idx = np.full(m, DISCOUNT_MODEL_ORDER.index(
                    self.scenario_discount_model))
            paths = np.empty((m, horizon))
            for i, kind in enumerate(DISCOUNT_MODEL_ORDER):
                rows = np.flatnonzero(disc_idx == i)
                if rows.size:
                    paths[rows] = simulate_from_innovations(
                        self.discount_models[kind], eps[rows])
            factors = np.exp(-np.cumsum(paths, axis=1))
        cum = np.concatenate([np.zeros((m, 1)), np.cumsum(factors, axis=1)],
                             axis=1)
        dsum = cum[np.arange(m), lifetime + 1]
        return ead * dsum


def damage_sensitivity(spec: DamageModelSpec, n: int = 4096, seed: int = 0,
                       sampler: str = "lhs", n_resamples: int = 1000,
                       bootstrap_seed: int = 1) -> SobolIndices:
    """Sobol' analysis of lifetime expected damages for one variant."""
    names = spec.factor_names
    design = saltelli_design(len(names), n, seed=seed, sampler=sampler)
    y = spec.evaluate(design.evaluation_matrix())
    idx = sobol_indices(design, y, factor_names=names)
    if idx.degenerate:
        return idx
    return bootstrap_significance(design, y, n_resamples=n_resamples,
                                  seed=bootstrap_seed, indices=idx)
