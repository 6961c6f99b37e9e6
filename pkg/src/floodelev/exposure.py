"""House exposure: depth-damage curves, elevation costs, and lifetime.

Damage tables give the damaged fraction of structure value as a function of
water depth above the lowest floor; two table families (HAZUS and the JRC
North-America aggregation) express the structural disagreement between
damage models, and a +/-30% multiplicative band expresses the uncertainty
within each. Elevation costs follow a contractor schedule with a fixed fee
plus banded per-square-foot rates for 3-7, 7-10, and 10-14 feet of lift.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class House:
    """A single-family structure; ``floor_rel_bfe`` is the lowest floor
    elevation minus the Base Flood Elevation (<= 0 for at-risk houses)."""

    value: float
    size_sqft: float
    floor_rel_bfe: float
    label: str = ""

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("house value must be positive")
        if self.size_sqft <= 0:
            raise ValueError("house size must be positive")


@dataclass
class DepthDamageCurve:
    """Damage fraction vs depth above the lowest floor, piecewise linear."""

    model_id: str
    depths_ft: np.ndarray
    fractions: np.ndarray
    error_halfwidth: float = 0.30

    def __post_init__(self):
        self.depths_ft = np.asarray(self.depths_ft, dtype=float)
        self.fractions = np.asarray(self.fractions, dtype=float)
        if self.depths_ft.size < 2:
            raise ValueError("damage table needs at least two knots")
        if np.any(np.diff(self.depths_ft) <= 0):
            raise ValueError("depths must strictly increase")
        if np.any(np.diff(self.fractions) < 0):
            raise ValueError("fractions must be non-decreasing")
        if self.fractions.min() < 0 or self.fractions.max() > 1:
            raise ValueError("fractions must lie in [0, 1]")

    @classmethod
    def from_csv(cls, path, model_id: str, error_halfwidth: float = 0.30):
        depths, fracs = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                depths.append(float(row["depth_ft"]))
                fracs.append(float(row["fraction"]))
        return cls(model_id, np.array(depths), np.array(fracs), error_halfwidth)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["depth_ft", "fraction"])
            for d, f in zip(self.depths_ft, self.fractions):
                w.writerow([repr(float(d)), repr(float(f))])


def load_damage_curves(directory) -> dict[str, DepthDamageCurve]:
    """Load all curves named by the directory's ``manifest.json``."""
    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    out = {}
    for entry in manifest["curves"]:
        cur = DepthDamageCurve.from_csv(
            directory / entry["file"], entry["model_id"],
            entry.get("error_halfwidth", 0.30),
        )
        out[cur.model_id] = cur
    return out


def damage_fraction(curve: DepthDamageCurve, depth, error_draw: float = 0.0):
    """Damaged fraction of structure value at ``depth`` feet above the floor.

    The table value is interpolated, scaled by (1 + error_draw), and clamped
    to [0, 1]. Depths below the first knot incur no damage; depths beyond
    the last knot hold at the final table value.
    """
    if abs(error_draw) > curve.error_halfwidth + 1e-12:
        raise ValueError(
            f"error draw {error_draw} outside +/-{curve.error_halfwidth} band"
        )
    base = np.interp(depth, curve.depths_ft, curve.fractions,
                     left=0.0, right=float(curve.fractions[-1]))
    scaled = np.clip(base * (1.0 + error_draw), 0.0, 1.0)
    if np.ndim(depth) == 0:
        return float(scaled)
    return scaled


def flood_damage(curve: DepthDamageCurve, house: House, water_level_rel_bfe,
                 h: float, error_draw: float = 0.0):
    """Dollar damage for a flood crest at ``water_level_rel_bfe`` feet
    (relative to the BFE) against a house elevated by ``h`` feet."""
    if h < 0:
        raise ValueError("heightening must be non-negative")
    depth = np.asarray(water_level_rel_bfe, dtype=float) - (house.floor_rel_bfe + h)
    frac = damage_fraction(curve, depth, error_draw)
    return frac * house.value


@dataclass(frozen=True)
class CostBand:
    lo_ft: float
    hi_ft: float
    rate_per_sqft: float


@dataclass
class ElevationCostModel:
    """CLARA-style heightening cost schedule: fixed fee + banded unit rates.

    ``mode`` selects how the banded rates apply: "step" charges the band's
    rate across its whole range; "interp" interpolates the rate linearly
    between band midpoints (the published cost curves are smooth).
    """

    fixed_fee: float = 20_745.0
    bands: tuple[CostBand, ...] = (
        CostBand(3.0, 7.0, 82.5),
        CostBand(7.0, 10.0, 86.25),
        CostBand(10.0, 14.0, 103.75),
    )
    mode: str = "step"

    def __post_init__(self):
        rates = [b.rate_per_sqft for b in self.bands]
        if any(r <= 0 for r in rates):
            raise ValueError("band rates must be positive")
        if any(b < a for a, b in zip(rates, rates[1:])):
            raise ValueError("band rates must be non-decreasing with height")
        if self.mode not in ("step", "interp"):
            raise ValueError(f"unknown cost mode {self.mode!r}")

    @property
    def min_h(self) -> float:
        return self.bands[0].lo_ft

    @property
    def max_h(self) -> float:
        return self.bands[-1].hi_ft

    def rate(self, h: float) -> float:
        """Unit rate ($/ft^2) applied to a lift of ``h`` feet."""
        if self.mode == "step":
            for band in self.bands:
                if band.lo_ft <= h < band.hi_ft:
                    return band.rate_per_sqft
            return self.bands[-1].rate_per_sqft
        mids = [0.5 * (b.lo_ft + b.hi_ft) for b in self.bands]
        rates = [b.rate_per_sqft for b in self.bands]
        return float(np.interp(h, mids, rates))

    @classmethod
    def from_json(cls, path) -> "ElevationCostModel":
        with open(path) as fh:
            d = json.load(fh)
        bands = tuple(CostBand(b["lo_ft"], b["hi_ft"], b["rate_per_sqft"])
                      for b in d["bands"])
        return cls(fixed_fee=d["fixed_fee"], bands=bands, mode=d.get("mode", "step"))

    def to_json(self, path):
        payload = {
            "fixed_fee": self.fixed_fee,
            "bands": [{"lo_ft": b.lo_ft, "hi_ft": b.hi_ft,
                       "rate_per_sqft": b.rate_per_sqft} for b in self.bands],
            "mode": self.mode,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def elevation_cost(model: ElevationCostModel, house: House, h: float,
                   allow_below_min: bool = False) -> float:
    """Upfront cost (USD) of raising a house by ``h`` feet.

    Zero lift costs nothing. Lifts between zero and three feet are not
    constructible under the schedule and raise, unless ``allow_below_min``
    prices them at the lowest band (used when auditing external
    recommendations that fall in the infeasible range).
    """
    if h == 0:
        return 0.0
    if h < 0 or h > model.max_h:
        raise ValueError(f"heightening {h} ft outside feasible range")
    if h < model.min_h:
        if not allow_below_min:
            raise ValueError(
                f"heightening {h} ft below the practical minimum {model.min_h} ft"
            )
        rate = model.bands[0].rate_per_sqft if model.mode == "step" else model.rate(h)
        return model.fixed_fee + rate * house.size_sqft
    return model.fixed_fee + model.rate(h) * house.size_sqft


@dataclass(frozen=True)
class LifetimeDist:
    """House lifetime model: a Weibull under uncertainty, or a fixed value."""

    kind: str = "weibull"  # "weibull" | "fixed"
    shape: float = 2.8
    scale: float = 73.5
    fixed_years: int = 30

    def __post_init__(self):
        if self.kind not in ("weibull", "fixed"):
            raise ValueError(f"unknown lifetime kind {self.kind!r}")
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("Weibull parameters must be positive")

    def ppf(self, u) -> np.ndarray:
        """Inverse CDF in whole years (>= 1); fixed kind ignores ``u``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "fixed":
            years = np.full(u.shape, float(self.fixed_years))
        else:
            years = stats.weibull_min.ppf(u, c=self.shape, scale=self.scale)
        return np.maximum(1, np.rint(years)).astype(int)

    @property
    def mean_years(self) -> float:
        if self.kind == "fixed":
            return float(self.fixed_years)
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


def sample_lifetime(dist: LifetimeDist, rng: np.random.Generator) -> int:
    """One lifetime draw in whole years (integer, at least one)."""
    if dist.kind == "fixed":
        return int(dist.fixed_years)
    return int(dist.ppf(rng.random()))
