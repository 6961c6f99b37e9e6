"""USGS daily-discharge ingest, rating-curve conversion, and annual maxima.

Handles the tab-separated RDB format used by USGS water services, converts
discharge to stage through a station rating table, and reduces daily water
levels to one annual maximum per year with coverage bookkeeping.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence


class RdbParseError(ValueError):
    """Raised when an RDB payload does not follow USGS conventions."""


class SeriesValidationError(ValueError):
    """Raised when a parsed series violates a structural invariant."""


@dataclass(frozen=True)
class DischargeRecord:
    date: dt.date
    discharge: Optional[float]  # cfs; None marks a reported-but-missing day


@dataclass
class DischargeSeries:
    """Daily discharge record for one gage, in cubic feet per second."""

    records: list[DischargeRecord]
    gage_id: str = ""

    def __post_init__(self):
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.date <= prev.date:
                raise SeriesValidationError(
                    f"dates not strictly increasing at {cur.date}"
                )
        for rec in self.records:
            if rec.discharge is not None and rec.discharge < 0:
                raise SeriesValidationError(f"negative discharge on {rec.date}")

    def __len__(self):
        return len(self.records)

    @property
    def n_gaps(self):
        return sum(1 for r in self.records if r.discharge is None)


@dataclass
class WaterLevelSeries:
    """Daily water levels (feet, gage datum) carried over from a discharge series."""

    records: list[tuple[dt.date, Optional[float]]]
    gage_id: str = ""
    n_extrapolated: int = 0


class Stage(NamedTuple):
    """Stage lookup result; ``extrapolated`` flags discharge outside the table."""

    value: float
    extrapolated: bool


@dataclass
class RatingCurve:
    """Stage-discharge rating table, piecewise linear in (discharge, stage)."""

    points: list[tuple[float, float]]  # (discharge cfs, stage ft), sorted

    def __post_init__(self):
        if len(self.points) < 2:
            raise SeriesValidationError("rating curve needs at least 2 points")
        qs = [p[0] for p in self.points]
        ss = [p[1] for p in self.points]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise SeriesValidationError("rating discharges must strictly increase")
        if any(b < a for a, b in zip(ss, ss[1:])):
            raise SeriesValidationError("rating stages must be non-decreasing")

    @classmethod
    def from_csv(cls, path) -> "RatingCurve":
        pts = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                pts.append((float(row["discharge"]), float(row["stage"])))
        pts.sort()
        return cls(pts)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["discharge", "stage"])
            for q, s in self.points:
                w.writerow([repr(q), repr(s)])


def discharge_to_stage(curve: RatingCurve, q: float) -> Stage:
    """Convert one discharge to stage by linear interpolation on the table.

    Outside the table the nearest segment is extended and the result is
    flagged as extrapolated.
    """
    if q <= 0:
        raise ValueError(f"discharge must be positive, got {q}")
    pts = curve.points
    if q < pts[0][0]:
        (q1, s1), (q2, s2) = pts[0], pts[1]
        return Stage(s1 + (s2 - s1) * (q - q1) / (q2 - q1), True)
    if q > pts[-1][0]:
        (q1, s1), (q2, s2) = pts[-2], pts[-1]
        return Stage(s2 + (s2 - s1) * (q - q2) / (q2 - q1), True)
    # bisect for the bracketing segment
    lo, hi = 0, len(pts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pts[mid][0] <= q:
            lo = mid
        else:
            hi = mid
    (q1, s1), (q2, s2) = pts[lo], pts[hi]
    return Stage(s1 + (s2 - s1) * (q - q1) / (q2 - q1), False)


def stage_series(curve: RatingCurve, series: DischargeSeries) -> WaterLevelSeries:
    """Apply the rating curve to every valid day; gaps stay gaps."""
    out: list[tuple[dt.date, Optional[float]]] = []
    n_extrap = 0
    for rec in series.records:
        if rec.discharge is None or rec.discharge <= 0:
            out.append((rec.date, None))
        else:
            st = discharge_to_stage(curve, rec.discharge)
            n_extrap += st.extrapolated
            out.append((rec.date, st.value))
    return WaterLevelSeries(out, gage_id=series.gage_id, n_extrapolated=n_extrap)


@dataclass
class AnnualMaxima:
    """One maximum water level per year with the fraction of the year observed."""

    entries: list[tuple[int, float, float]]  # (year, level ft, coverage)
    excluded: list[tuple[int, float]] = field(default_factory=list)  # (year, coverage)

    @property
    def years(self):
        return [e[0] for e in self.entries]

    @property
    def levels(self):
        return [e[1] for e in self.entries]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["year", "level", "coverage"])
            for year, level, cov in self.entries:
                w.writerow([int(year), repr(float(level)), repr(float(cov))])

    @classmethod
    def from_csv(cls, path) -> "AnnualMaxima":
        entries = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                entries.append((int(row["year"]), float(row["level"]), float(row["coverage"])))
        return cls(entries)


def _year_of(date: dt.date, water_year: bool) -> int:
    if water_year and date.month >= 10:
        return date.year + 1
    return date.year


def _days_in_year(year: int, water_year: bool) -> int:
    if water_year:
        start = dt.date(year - 1, 10, 1)
        end = dt.date(year, 10, 1)
        return (end - start).days
    return 366 if dt.date(year, 12, 31).timetuple().tm_yday == 366 else 365


def annual_maxima(levels: WaterLevelSeries, min_coverage: float = 0.9,
                  water_year: bool = False) -> AnnualMaxima:
    """Reduce daily levels to per-year maxima, dropping poorly observed years.

    Coverage is valid days divided by days in the (calendar or water) year;
    years below ``min_coverage`` are excluded and reported separately.
    """
    if not levels.records:
        raise SeriesValidationError("empty water level series")
    by_year: dict[int, list[float]] = {}
    for date, level in levels.records:
        year = _year_of(date, water_year)
        by_year.setdefault(year, [])
        if level is not None:
            by_year[year].append(level)
    entries, excluded = [], []
    for year in sorted(by_year):
        valid = by_year[year]
        cov = len(valid) / _days_in_year(year, water_year)
        if cov >= min_coverage and valid:
            entries.append((year, max(valid), cov))
        else:
            excluded.append((year, cov))
    return AnnualMaxima(entries, excluded)


# --- USGS RDB parsing ---------------------------------------------------

_FORMAT_TOKEN = re.compile(r"^\d+[dsn]$")


def parse_usgs_rdb(text: str, param_code: str = "00060") -> DischargeSeries:
    """Parse a USGS RDB daily-values payload into a discharge series.

    Expects '#' comment lines, a tab-separated header row, a format row
    (tokens like ``5s``/``20d``), then data rows. Empty or non-numeric
    value fields become explicit gaps.
    """
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and (lines[idx].startswith("#") or not lines[idx].strip()):
        idx += 1
    if idx >= len(lines):
        raise RdbParseError("no header row found after comments")
    header = lines[idx].split("\t")
    if "datetime" not in header:
        raise RdbParseError(f"line {idx + 1}: header row lacks a 'datetime' column")
    if idx + 1 >= len(lines):
        raise RdbParseError(f"line {idx + 2}: missing format row")
    fmt = lines[idx + 1].split("\t")
    if not all(_FORMAT_TOKEN.match(tok.strip()) for tok in fmt if tok.strip()):
        raise RdbParseError(f"line {idx + 2}: malformed format row {fmt!r}")

    date_col = header.index("datetime")
    site_col = header.index("site_no") if "site_no" in header else None
    value_col = None
    for j, name in enumerate(header):
        if param_code in name and not name.endswith("_cd"):
            value_col = j
            break
    if value_col is None:
        raise RdbParseError(
            f"line {idx + 1}: no value column for parameter {param_code}"
        )

    records: list[DischargeRecord] = []
    gage_id = ""
    for lineno, line in enumerate(lines[idx + 2:], start=idx + 3):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        try:
            date = dt.date.fromisoformat(fields[date_col].strip()[:10])
        except (ValueError, IndexError) as exc:
            raise RdbParseError(f"line {lineno}: bad datetime field") from exc
        if site_col is not None and len(fields) > site_col:
            gage_id = gage_id or fields[site_col].strip()
        raw = fields[value_col].strip() if len(fields) > value_col else ""
        try:
            value: Optional[float] = float(raw) if raw else None
        except ValueError:
            value = None  # qualifier text such as 'Ice' marks a gap
        records.append(DischargeRecord(date, value))

    try:
        return DischargeSeries(records, gage_id=gage_id)
    except SeriesValidationError as exc:
        raise SeriesValidationError(f"RDB data rows invalid: {exc}") from exc


def serialize_rdb(series: DischargeSeries, param_code: str = "00060") -> str:
    """Write a series back out as a minimal clean RDB payload."""
    buf = io.StringIO()
    col = f"00001_{param_code}_00003"
    buf.write("# Daily discharge, cubic feet per second\n")
    buf.write(f"agency_cd\tsite_no\tdatetime\t{col}\t{col}_cd\n")
    buf.write("5s\t15s\t20d\t14n\t10s\n")
    for rec in series.records:
        val = "" if rec.discharge is None else f"{rec.discharge:g}"
        flag = "" if rec.discharge is None else "A"
        buf.write(f"USGS\t{series.gage_id}\t{rec.date.isoformat()}\t{val}\t{flag}\n")
    return buf.getvalue()
