#!/usr/bin/env python3
"""Regenerate the bundled example dataset under data/.

The bundle is a self-contained, statistically realistic stand-in for the
study inputs: a daily-discharge record in USGS RDB format whose annual
maximum stages follow a known GEV, a monotone stage-discharge rating table,
and a smoothed historical real discount-rate series consistent with the
published AR(3) fit statistics. Everything is seeded; rerunning this script
reproduces the files byte for byte.
"""

import csv
import datetime as dt
import sys
from pathlib import Path

import numpy as np
from scipy import stats

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from floodelev.discount import DiscountSeries, ModelKind, fit_all  # noqa: E402
from floodelev.hydro import RatingCurve, annual_maxima, parse_usgs_rdb, \
    stage_series  # noqa: E402

GAGE_ID = "01554000"
YEARS = (1937, 2019)

# annual-maximum stage distribution (feet, gage datum)
GEV_MU, GEV_SIGMA, GEV_XI = 16.0, 2.0, 0.30
MAXIMA_SEED = 19

# discount-rate series: simulated from the background-trend AR(3)
DISCOUNT_SEED = 60
DISCOUNT_YEARS = (1800, 2018)
BT_ETA, BT_BETA = 1.9289, -0.0058
BT_RHO = np.array([1.6965, -0.9755, 0.2388])
BT_SIGMA2 = 0.0033

RATING_EXPONENT = 0.52
RATING_REF_Q = 1000.0


def build_rating_curve() -> RatingCurve:
    qs = np.unique(np.round(np.logspace(np.log10(500), np.log10(1_500_000), 45)))
    stages = np.round((qs / RATING_REF_Q) ** RATING_EXPONENT, 3)
    pts = [(float(q), float(s)) for q, s in zip(qs, stages)]
    curve = RatingCurve(pts)
    if any(b[1] <= a[1] for a, b in zip(pts, pts[1:])):
        raise AssertionError("rating stages must strictly increase")
    return curve


def invert_rating(curve: RatingCurve, stage: np.ndarray) -> np.ndarray:
    qs = np.array([p[0] for p in curve.points])
    ss = np.array([p[1] for p in curve.points])
    return np.interp(stage, ss, qs)


def target_maxima() -> np.ndarray:
    rng = np.random.default_rng(MAXIMA_SEED)
    dist = stats.genextreme(c=-GEV_XI, loc=GEV_MU, scale=GEV_SIGMA)
    return dist.rvs(size=YEARS[1] - YEARS[0] + 1, random_state=rng)


def make_discharge_rdb(curve: RatingCurve) -> str:
    """Daily flows with seasonal structure, rescaled per year so the annual
    peak discharge hits the target stage through the rating table."""
    targets = target_maxima()
    target_q = invert_rating(curve, targets)
    rng = np.random.default_rng(911)
    gap_rng = np.random.default_rng(912)

    lines = [
        "# ---------------------------------- WARNING ----------------------------------------",
        "# Provisional data example bundle. Daily mean discharge, cubic feet per second.",
        f"# Data for site {GAGE_ID} SUSQUEHANNA RIVER AT SUNBURY, PA",
        "# contact: see repository documentation",
        "#",
        f"agency_cd\tsite_no\tdatetime\t85234_00060_00003\t85234_00060_00003_cd",
        "5s\t15s\t20d\t14n\t10s",
    ]
    for yi, year in enumerate(range(YEARS[0], YEARS[1] + 1)):
        start = dt.date(year, 1, 1)
        ndays = (dt.date(year + 1, 1, 1) - start).days
        doy = np.arange(ndays)
        seasonal = 0.85 * np.sin(2 * np.pi * (doy - 105) / 365.25)
        ar = np.empty(ndays)
        ar[0] = rng.standard_normal() * 0.3
        eps = rng.standard_normal(ndays) * 0.13
        for t in range(1, ndays):
            ar[t] = 0.94 * ar[t - 1] + eps[t]
        logq = np.log(22_000.0) + seasonal + ar
        q = np.exp(logq)
        q *= target_q[yi] / q.max()
        peak_day = int(np.argmax(q))

        missing = set()
        if gap_rng.random() < 0.35:
            n_gap = int(gap_rng.integers(2, 9))
            gap_start = int(gap_rng.integers(0, ndays - n_gap))
            missing = set(range(gap_start, gap_start + n_gap))
        if year == 1963:  # one longer instrument outage
            missing |= set(range(200, 221))
        missing.discard(peak_day)

        for t in range(ndays):
            date = start + dt.timedelta(days=int(t))
            if t in missing:
                lines.append(f"USGS\t{GAGE_ID}\t{date.isoformat()}\t\t")
            else:
                lines.append(
                    f"USGS\t{GAGE_ID}\t{date.isoformat()}\t{q[t]:.0f}\tA")
    return "\n".join(lines) + "\n"


def make_discount_series() -> DiscountSeries:
    n = DISCOUNT_YEARS[1] - DISCOUNT_YEARS[0] + 1
    rng = np.random.default_rng(DISCOUNT_SEED)
    x = np.empty(n)
    x[:3] = BT_ETA + BT_BETA * np.arange(3) + 0.05 * rng.standard_normal(3)
    sig = np.sqrt(BT_SIGMA2)
    for t in range(3, n):
        trend = BT_ETA + BT_BETA * t
        dev = x[[t - 1, t - 2, t - 3]] - (BT_ETA + BT_BETA * np.array([t - 1, t - 2, t - 3]))
        x[t] = trend + BT_RHO @ dev + sig * rng.standard_normal()
    rates = np.round(np.exp(x), 6)
    return DiscountSeries(list(range(DISCOUNT_YEARS[0], DISCOUNT_YEARS[1] + 1)),
                          list(rates))


def main():
    data = ROOT / "data"
    data.mkdir(exist_ok=True)

    curve = build_rating_curve()
    curve.to_csv(data / f"rating_curve_{GAGE_ID}.csv")

    rdb = make_discharge_rdb(curve)
    (data / f"usgs_{GAGE_ID}_daily_discharge.rdb").write_text(rdb)

    series = make_discount_series()
    series.to_csv(data / f"discount_rates_{DISCOUNT_YEARS[0]}_{DISCOUNT_YEARS[1]}.csv")

    # verification: ingest round trip reproduces the target maxima
    parsed = parse_usgs_rdb(rdb)
    maxima = annual_maxima(stage_series(curve, parsed), min_coverage=0.9)
    targets = target_maxima()
    years = [e[0] for e in maxima.entries]
    assert years == list(range(YEARS[0], YEARS[1] + 1)), "unexpected year span"
    achieved = np.array([e[1] for e in maxima.entries])
    err = np.abs(achieved - targets).max()
    assert err < 0.02, f"annual max stage error too large: {err}"

    fits = fit_all(series)
    rw, mr, bt = (fits[ModelKind.RANDOM_WALK], fits[ModelKind.MEAN_REVERTING],
                  fits[ModelKind.BACKGROUND_TREND])
    assert bt.aic < rw.aic and bt.aic < mr.aic, "trend model must win on AIC"
    assert abs(rw.aic - mr.aic) < 2.0, "walk vs reverting AIC gap too large"
    assert abs(bt.eta - BT_ETA) < 2 * 0.1728 and abs(bt.beta - BT_BETA) < 2 * 0.0014

    print(f"rating curve: {len(curve.points)} points")
    print(f"discharge record: {len(parsed)} days, {parsed.n_gaps} gaps, "
          f"{len(maxima.entries)} annual maxima, max stage err {err:.4f} ft")
    print(f"discount series: {len(series)} years, ends {series.rates_percent[-1]:.2f}%")
    print(f"AIC: rw {rw.aic:.1f} mr {mr.aic:.1f} bt {bt.aic:.1f}; "
          f"bt eta {bt.eta:.4f} beta {bt.beta:.5f}")


if __name__ == "__main__":
    main()
