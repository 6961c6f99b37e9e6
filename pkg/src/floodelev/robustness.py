"""Satisficing robustness over SOW ensembles and Pareto trade-off fronts.

The domain measure scores a heightening policy by the fraction of states of
the world in which each objective -- and all of them jointly -- lands inside
the decision-maker's acceptable range.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .objectives import ObjectiveSurface


@dataclass(frozen=True)
class AcceptableRanges:
    """Stakeholder-acceptable objective ranges for the satisficing measure."""

    bcr_min: float = 1.0
    total_ratio_max: float = 0.75
    reliability_min: float = 0.5
    # A policy of zero lift has no investment to ratio against; by default
    # it fails the BCR criterion (no benefit without investment).
    bcr_at_zero_satisfied: bool = False


@dataclass
class RobustnessResult:
    """Per-policy satisficing fractions, one row per grid lift."""

    h_grid: np.ndarray
    bcr_frac: np.ndarray
    total_frac: np.ndarray
    reliability_frac: np.ndarray
    joint_frac: np.ndarray
    ranges: AcceptableRanges = field(default_factory=AcceptableRanges)

    def at_h(self, h: float) -> dict:
        idx = np.flatnonzero(np.isclose(self.h_grid, h, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"h={h} not scored")
        i = int(idx[0])
        return {
            "h": float(self.h_grid[i]),
            "bcr": float(self.bcr_frac[i]),
            "total_cost": float(self.total_frac[i]),
            "reliability": float(self.reliability_frac[i]),
            "joint": float(self.joint_frac[i]),
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "bcr_frac", "total_cost_frac",
                        "reliability_frac", "joint_frac"])
            for i in range(self.h_grid.size):
                w.writerow([repr(float(self.h_grid[i])),
                            repr(float(self.bcr_frac[i])),
                            repr(float(self.total_frac[i])),
                            repr(float(self.reliability_frac[i])),
                            repr(float(self.joint_frac[i]))])


def domain_measure(surface: ObjectiveSurface,
                   ranges: AcceptableRanges = AcceptableRanges()) -> RobustnessResult:
    """Fraction of SOWs meeting each acceptable range, per lift and jointly."""
    if surface.n_sow == 0:
        raise ValueError("surface carries no SOW columns")
    total_ok = (surface.total_ratio >= 0.0) & (surface.total_ratio <= ranges.total_ratio_max)
    rel_ok = (surface.reliability >= ranges.reliability_min) & (surface.reliability <= 1.0)
    bcr = surface.bcr
    bcr_ok = np.zeros(bcr.shape, dtype=bool)
    valued = ~np.isnan(bcr)
    bcr_ok[valued] = bcr[valued] >= ranges.bcr_min
    if ranges.bcr_at_zero_satisfied:
        bcr_ok[~valued] = True
    joint = total_ok & rel_ok & bcr_ok
    return RobustnessResult(
        h_grid=surface.h_grid.copy(),
        bcr_frac=bcr_ok.mean(axis=1),
        total_frac=total_ok.mean(axis=1),
        reliability_frac=rel_ok.mean(axis=1),
        joint_frac=joint.mean(axis=1),
        ranges=ranges,
    )


def pareto_front(points, senses) -> list[int]:
    """Indices of weakly nondominated points, ordered by the first axis.

    ``senses`` gives "min" or "max" per axis. A point is dropped when some
    other point is at least as good on every axis and strictly better on one.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need a non-empty 2-D point set")
    if pts.shape[1] != len(senses):
        raise ValueError("senses must match point dimensionality")
    signs = np.array([1.0 if s == "min" else -1.0 for s in senses])
    work = pts * signs  # minimize everything
    n = work.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        better_eq = np.all(work <= work[i], axis=1)
        strictly = np.any(work < work[i], axis=1)
        if np.any(better_eq & strictly):
            keep[i] = False
    idx = np.flatnonzero(keep)
    return [int(j) for j in idx[np.argsort(work[idx, 0], kind="stable")]]


@dataclass(frozen=True)
class TradeoffRow:
    h: float
    upfront: float
    reliability: float
    expected_damages: float
    bcr: float
    passes_cb_test: bool


def tradeoff_export(surface: ObjectiveSurface) -> list[TradeoffRow]:
    """Per-lift rows for trade-off and parallel-axes plots.

    The cost-benefit flag marks lifts whose expected benefit-to-cost ratio
    reaches one; zero lift never passes (there is no investment).
    """
    mean_rel = surface.expected("reliability")
    mean_led = surface.expected("led")
    mean_bcr = surface.expected("bcr")
    rows = []
    for i, h in enumerate(surface.h_grid):
        b = float(mean_bcr[i])
        rows.append(TradeoffRow(
            h=float(h),
            upfront=float(surface.upfront[i]),
            reliability=float(mean_rel[i]),
            expected_damages=float(mean_led[i]),
            bcr=b,
            passes_cb_test=bool(not np.isnan(b) and b >= 1.0),
        ))
    return rows


def tradeoff_to_csv(rows: list[TradeoffRow], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "upfront", "reliability", "expected_damages",
                    "bcr", "passes_cb_test"])
        for r in rows:
            w.writerow([repr(r.h), repr(r.upfront), repr(r.reliability),
                        repr(r.expected_damages), repr(r.bcr),
                        int(r.passes_cb_test)])
