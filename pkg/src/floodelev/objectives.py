"""Stakeholder objectives per heightening policy.

For a candidate lift h the engine evaluates: upfront cost relative to house
value; total discounted cost (upfront plus lifetime expected damages);
benefit-to-cost ratio against doing nothing; and reliability, the chance of
zero floods above the lowest floor over the house lifetime. Expected annual
damage (EAD) is the area under the damage-vs-exceedance-probability curve,
integrated by the trapezoid rule on a log-spaced return-period grid; the
lifetime figure discounts a constant per-year EAD over years 0..n.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .exposure import DepthDamageCurve, ElevationCostModel, House, \
    damage_fraction, elevation_cost
from .hazard import GevParams, _cdf_arr, _quantile_arr, gev_cdf, gev_quantile
from .sow import DAMAGE_MODELS, SowEnsemble


@dataclass(frozen=True)
class EadGrid:
    """Integration grid over exceedance probability, log-spaced in return
    period from ``t_min`` to ``t_max`` years."""

    t_min: float = 1.001
    t_max: float = 10_000.0
    n_nodes: int = 257

    def __post_init__(self):
        if self.n_nodes < 200:
            raise ValueError("EAD grid needs at least 200 nodes")
        if not (1.0 < self.t_min < self.t_max):
            raise ValueError("need 1 < t_min < t_max")

    @cached_property
    def exceedance(self) -> np.ndarray:
        """Exceedance probabilities, ascending."""
        periods = np.logspace(math.log10(self.t_min), math.log10(self.t_max),
                              self.n_nodes)
        return (1.0 / periods)[::-1].copy()


def default_h_grid(step: float = 0.1, h_min: float = 3.0,
                   h_max: float = 14.0) -> np.ndarray:
    """The feasible lift grid: zero plus [h_min, h_max] at ``step`` feet."""
    n = int(round((h_max - h_min) / step))
    return np.concatenate([[0.0], np.round(h_min + step * np.arange(n + 1), 6)])


def validate_policy(h: float, cost_model: ElevationCostModel) -> float:
    if h == 0:
        return 0.0
    if not (cost_model.min_h <= h <= cost_model.max_h):
        raise ValueError(
            f"heightening {h} ft must be 0 or within "
            f"[{cost_model.min_h}, {cost_model.max_h}]"
        )
    return float(h)


def ead(gev: GevParams, curve: DepthDamageCurve, error_draw: float,
        house: House, h: float, bfe: float, grid: EadGrid = EadGrid()) -> float:
    """Expected annual damages (USD/yr): the damage integral over exceedance
    probability for one parameter set."""
    p = grid.exceedance
    levels = gev_quantile(gev, 1.0 - p)
    frac = damage_fraction(curve, (levels - bfe) - (house.floor_rel_bfe + h),
                           error_draw)
    return float(np.trapezoid(frac * house.value, p))


def led(ead_per_year: float, lifetime: int, factors: np.ndarray) -> float:
    """Lifetime expected damages: the constant annual expectation discounted
    over years 0..lifetime inclusive."""
    factors = np.asarray(factors, dtype=float)
    if factors.size < lifetime + 1:
        raise ValueError(
            f"need {lifetime + 1} discount factors, got {factors.size}"
        )
    return float(ead_per_year * factors[: lifetime + 1].sum())


def reliability(gev: GevParams, house: House, h: float, lifetime: int,
                bfe: float) -> float:
    """Probability of zero floods above the (possibly lifted) lowest floor
    over the house lifetime: annual non-exceedance to the n-th power."""
    annual = gev_cdf(gev, bfe + house.floor_rel_bfe + h)
    return float(annual ** lifetime)


@dataclass(frozen=True)
class FemaRecommendation:
    h: float
    feasible: bool


def fema_recommendation(house: House, freeboard: float = 1.5,
                        min_h: float = 3.0) -> FemaRecommendation:
    """Lift needed to put the lowest floor at BFE + freeboard.

    Lifts below the constructible minimum are reported as-is but flagged
    infeasible.
    """
    if house.floor_rel_bfe > 0:
        raise ValueError("house floor already above the BFE")
    h = -house.floor_rel_bfe + freeboard
    return FemaRecommendation(h=h, feasible=h >= min_h)


@dataclass
class ObjectiveSurface:
    """Objective values over a lift grid; per-SOW columns plus expectations.

    ``led`` and ``reliability`` have shape (n_h, n_sow); the ignoring-
    uncertainty mode is the degenerate single-column case.
    """

    mode: str
    house: House
    h_grid: np.ndarray
    upfront: np.ndarray
    led: np.ndarray
    reliability: np.ndarray

    @property
    def n_sow(self) -> int:
        return self.led.shape[1]

    @property
    def o1(self) -> np.ndarray:
        return self.upfront / self.house.value

    @property
    def total(self) -> np.ndarray:
        return self.upfront[:, None] + self.led

    @property
    def total_ratio(self) -> np.ndarray:
        return self.total / self.house.value

    @cached_property
    def bcr(self) -> np.ndarray:
        """(LED_0 - LED_h) / C_h per SOW; the h = 0 row is NaN."""
        i0 = int(np.flatnonzero(self.h_grid == 0.0)[0])
        out = np.full_like(self.led, np.nan)
        nz = self.upfront > 0
        out[nz] = (self.led[i0][None, :] - self.led[nz]) / self.upfront[nz, None]
        return out

    def index_of(self, h: float) -> int:
        idx = np.flatnonzero(np.isclose(self.h_grid, h, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"h={h} not on the surface grid")
        return int(idx[0])

    def expected(self, name: str) -> np.ndarray:
        arr = getattr(self, name)
        if arr.ndim != 2:
            return arr
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN h=0 BCR row
            return np.nanmean(arr, axis=1)

    def quantile(self, name: str, q: float) -> np.ndarray:
        arr = getattr(self, name)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.nanquantile(arr, q, axis=1)

    def to_csv(self, path):
        cols = {
            "h": self.h_grid,
            "o1_upfront_ratio": self.o1,
            "o2_total_mean": self.expected("total"),
            "o2_total_q05": self.quantile("total", 0.05),
            "o2_total_q95": self.quantile("total", 0.95),
            "o2_ratio_mean": self.expected("total_ratio"),
            "o2_ratio_q05": self.quantile("total_ratio", 0.05),
            "o2_ratio_q95": self.quantile("total_ratio", 0.95),
            "o3_bcr_mean": self.expected("bcr"),
            "o4_reliability_mean": self.expected("reliability"),
            "led_mean": self.expected("led"),
        }
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols) + ["mode"])
            for i in range(self.h_grid.size):
                w.writerow([repr(float(cols[k][i])) for k in cols] + [self.mode])


class UncertainWorld:
    """Vectorized objective evaluation against a SOW ensemble.

    The per-SOW water levels on the EAD grid depend only on the ensemble,
    so they are computed once and shared across houses and lifts.
    """

    mode = "considering"

    def __init__(self, ensemble: SowEnsemble,
                 curves: dict[str, DepthDamageCurve], bfe: float,
                 cost_model: ElevationCostModel = None,
                 grid: EadGrid = EadGrid()):
        self.ensemble = ensemble
        self.curves = curves
        self.bfe = bfe
        self.cost_model = cost_model or ElevationCostModel()
        self.grid = grid
        p = grid.exceedance
        self.levels_rel_bfe = _quantile_arr(
            ensemble.mu[:, None], ensemble.sigma[:, None], ensemble.xi[:, None],
            (1.0 - p)[None, :],
        ) - bfe
        self._groups = {
            mid: np.flatnonzero(ensemble.damage_model == i)
            for i, mid in enumerate(DAMAGE_MODELS)
        }
        self._scale = np.clip(1.0 + ensemble.damage_error, 0.0, None)[:, None]

    def ead_fractions(self, floor_rel_bfe: float, h: float) -> np.ndarray:
        """Per-SOW expected annual damage as a fraction of house value."""
        depth = self.levels_rel_bfe - (floor_rel_bfe + h)
        frac = np.empty_like(depth)
        for mid, rows in self._groups.items():
            if rows.size:
                curve = self.curves[mid]
                frac[rows] = np.interp(depth[rows], curve.depths_ft,
                                       curve.fractions, left=0.0,
                                       right=float(curve.fractions[-1]))
        frac = np.clip(frac * self._scale, 0.0, 1.0)
        return np.trapezoid(frac, self.grid.exceedance, axis=1)

    def ead_at(self, house: House, h: float) -> np.ndarray:
        return house.value * self.ead_fractions(house.floor_rel_bfe, h)

    def led_at(self, house: House, h: float) -> np.ndarray:
        return self.ead_at(house, h) * self.ensemble.discount_sum

    def reliability_at(self, house: House, h) -> np.ndarray:
        h_arr = np.atleast_1d(np.asarray(h, dtype=float))
        level = self.bfe + house.floor_rel_bfe + h_arr
        annual = _cdf_arr(self.ensemble.mu[None, :], self.ensemble.sigma[None, :],
                          self.ensemble.xi[None, :], level[:, None])
        out = annual ** self.ensemble.lifetime[None, :]
        return out if np.ndim(h) else out[0]

    def surface(self, house: House,
                h_values: Optional[Sequence[float]] = None) -> ObjectiveSurface:
        h_grid = np.asarray(default_h_grid() if h_values is None else h_values,
                            dtype=float)
        upfront = np.array([
            elevation_cost(self.cost_model, house, h, allow_below_min=True)
            for h in h_grid
        ])
        led_m = np.stack([
            self.ead_fractions(house.floor_rel_bfe, h) for h in h_grid
        ]) * (house.value * self.ensemble.discount_sum[None, :])
        rel = self.reliability_at(house, h_grid)
        return ObjectiveSurface(self.mode, house, h_grid, upfront, led_m, rel)


class IgnoringWorld:
    """Point-estimate evaluation: MAP hazard, nominal damage curve, fixed
    lifetime and discount rate."""

    mode = "ignoring"

    def __init__(self, gev: GevParams, curve: DepthDamageCurve, bfe: float,
                 lifetime: int = 30, rate: float = 0.04,
                 cost_model: ElevationCostModel = None,
                 grid: EadGrid = EadGrid()):
        self.gev = gev
        self.curve = curve
        self.bfe = bfe
        self.lifetime = lifetime
        self.rate = rate
        self.cost_model = cost_model or ElevationCostModel()
        self.grid = grid
        t = np.arange(1, lifetime + 2, dtype=float)
        self.discount_sum = float(np.exp(-rate * t).sum())

    def ead_at(self, house: House, h: float) -> float:
        return ead(self.gev, self.curve, 0.0, house, h, self.bfe, self.grid)

    def led_at(self, house: House, h: float) -> float:
        return self.ead_at(house, h) * self.discount_sum

    def reliability_at(self, house: House, h: float) -> float:
        return reliability(self.gev, house, h, self.lifetime, self.bfe)

    def surface(self, house: House,
                h_values: Optional[Sequence[float]] = None) -> ObjectiveSurface:
        h_grid = np.asarray(default_h_grid() if h_values is None else h_values,
                            dtype=float)
        upfront = np.array([
            elevation_cost(self.cost_model, house, h, allow_below_min=True)
            for h in h_grid
        ])
        led_m = np.array([[self.led_at(house, h)] for h in h_grid])
        rel = np.array([[self.reliability_at(house, h)] for h in h_grid])
        return ObjectiveSurface(self.mode, house, h_grid, upfront, led_m, rel)


@dataclass
class OptimizeResult:
    h_opt: float
    expected_total: float
    surface: ObjectiveSurface


def total_cost(house: House, h: float, world) -> tuple[np.ndarray, float]:
    """Per-SOW total cost (upfront + lifetime damages) and its expectation.

    For the ignoring-uncertainty world the vector is a single value.
    """
    h = validate_policy(h, world.cost_model)
    upfront = elevation_cost(world.cost_model, house, h)
    vec = np.atleast_1d(world.led_at(house, h)) + upfront
    return vec, float(vec.mean())


def bcr(house: House, h: float, world) -> tuple[np.ndarray, float]:
    """Per-SOW benefit-to-cost ratio of lifting by ``h`` and its mean."""
    h = validate_policy(h, world.cost_model)
    if h == 0:
        raise ValueError("benefit-to-cost ratio undefined without investment")
    upfront = elevation_cost(world.cost_model, house, h)
    saved = np.atleast_1d(world.led_at(house, 0.0)) - np.atleast_1d(
        world.led_at(house, h))
    vec = saved / upfront
    return vec, float(vec.mean())


def optimize_height(house: House, world,
                    h_values: Optional[Sequence[float]] = None) -> OptimizeResult:
    """Grid-search the lift minimizing expected total cost (ties -> lowest h)."""
    surface = world.surface(house, h_values)
    expected_total = surface.expected("total")
    i = int(np.argmin(expected_total))
    return OptimizeResult(h_opt=float(surface.h_grid[i]),
                          expected_total=float(expected_total[i]),
                          surface=surface)
