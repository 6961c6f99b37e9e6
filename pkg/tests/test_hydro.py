import datetime as dt

import pytest
from hypothesis import given, strategies as st

from floodelev.hydro import (AnnualMaxima, DischargeRecord, DischargeSeries,
                             RatingCurve, RdbParseError, SeriesValidationError,
                             annual_maxima, discharge_to_stage, parse_usgs_rdb,
                             serialize_rdb, stage_series, WaterLevelSeries)

RDB_HEADER = (
    "# comment line\n"
    "agency_cd\tsite_no\tdatetime\t85234_00060_00003\t85234_00060_00003_cd\n"
    "5s\t15s\t20d\t14n\t10s\n"
)


def make_rdb(rows):
    return RDB_HEADER + "".join(
        f"USGS\t01554000\t{date}\t{value}\t{code}\n" for date, value, code in rows
    )


class TestParseRdb:
    def test_two_rows_direct_mapping(self):
        text = make_rdb([("1950-01-01", "1000", "A"), ("1950-01-02", "1200", "A")])
        series = parse_usgs_rdb(text)
        assert len(series) == 2
        assert series.records[0] == DischargeRecord(dt.date(1950, 1, 1), 1000.0)
        assert series.records[1].discharge == 1200.0
        assert series.gage_id == "01554000"

    def test_empty_value_becomes_gap(self):
        text = make_rdb([("1950-01-01", "1000", "A"), ("1950-01-02", "", "")])
        series = parse_usgs_rdb(text)
        assert series.records[1].discharge is None
        assert series.n_gaps == 1

    def test_qualifier_text_becomes_gap(self):
        text = make_rdb([("1950-01-01", "Ice", "e")])
        assert parse_usgs_rdb(text).records[0].discharge is None

    def test_malformed_header_names_line(self):
        bad = "# c\nagency_cd\tsite_no\tnotdate\tx\n5s\t15s\t20d\t14n\n"
        with pytest.raises(RdbParseError, match="line 2"):
            parse_usgs_rdb(bad)

    def test_malformed_format_row(self):
        bad = ("# c\nagency_cd\tsite_no\tdatetime\tx_00060_y\n"
               "whatever\tnope\n")
        with pytest.raises(RdbParseError, match="format row"):
            parse_usgs_rdb(bad)

    def test_non_monotone_dates_rejected(self):
        text = make_rdb([("1950-01-02", "10", "A"), ("1950-01-01", "11", "A")])
        with pytest.raises(SeriesValidationError, match="increasing"):
            parse_usgs_rdb(text)

    def test_shipped_file_spans_1937_2019(self, shipped_maxima):
        years = shipped_maxima.years
        assert years[0] == 1937 and years[-1] == 2019
        assert len(years) == 83

    def test_roundtrip_preserves_pairs(self):
        rows = [("1950-01-01", "1000", "A"), ("1950-01-02", "", ""),
                ("1950-01-03", "1250.5", "A")]
        series = parse_usgs_rdb(make_rdb(rows))
        again = parse_usgs_rdb(serialize_rdb(series))
        assert [(r.date, r.discharge) for r in again.records] == \
               [(r.date, r.discharge) for r in series.records]


class TestRatingCurve:
    curve = RatingCurve([(100.0, 1.0), (200.0, 2.0), (400.0, 3.0)])

    def test_exact_knot(self):
        assert discharge_to_stage(self.curve, 200.0) == (2.0, False)

    def test_midpoint_linearity(self):
        st_ = discharge_to_stage(self.curve, 150.0)
        assert st_.value == pytest.approx(1.5)
        assert not st_.extrapolated

    def test_extrapolation_above_table(self):
        # independent two-point line through the last knots
        (q1, s1), (q2, s2) = (200.0, 2.0), (400.0, 3.0)
        q = 500.0
        expected = s1 + (s2 - s1) * (q - q1) / (q2 - q1)
        result = discharge_to_stage(self.curve, q)
        assert result.value == pytest.approx(expected)
        assert result.extrapolated

    def test_extrapolation_below_table(self):
        result = discharge_to_stage(self.curve, 50.0)
        assert result.extrapolated
        assert result.value == pytest.approx(0.5)

    def test_nonpositive_discharge_rejected(self):
        with pytest.raises(ValueError):
            discharge_to_stage(self.curve, 0.0)

    def test_monotone_rating_required(self):
        with pytest.raises(SeriesValidationError):
            RatingCurve([(100.0, 2.0), (200.0, 1.0)])

    @given(st.lists(st.tuples(st.floats(1, 1e6), st.floats(0, 100)),
                    min_size=2, max_size=12, unique_by=lambda p: p[0]),
           st.floats(0.5, 2e6), st.floats(0.5, 2e6))
    def test_interpolated_stage_monotone(self, points, qa, qb):
        points = sorted(points)
        stages = sorted(s for _, s in points)
        curve = RatingCurve([(q, s) for (q, _), s in zip(points, stages)])
        lo, hi = min(qa, qb), max(qa, qb)
        assert discharge_to_stage(curve, lo).value <= \
               discharge_to_stage(curve, hi).value + 1e-9


class TestAnnualMaxima:
    def _levels(self, spec):
        # spec: list of (year, [levels or None per day starting Jan 1])
        records = []
        for year, values in spec:
            day = dt.date(year, 1, 1)
            for v in values:
                records.append((day, v))
                day += dt.timedelta(days=1)
        return WaterLevelSeries(records)

    def test_constant_year(self):
        levels = self._levels([(2000, [10.0] * 366)])
        result = annual_maxima(levels, min_coverage=0.9)
        assert result.entries == [(2000, 10.0, 1.0)]

    def test_two_years(self):
        levels = self._levels([(2001, [11.0] * 364 + [12.0]),
                               (2002, [15.0] + [9.0] * 364)])
        result = annual_maxima(levels, min_coverage=0.9)
        assert [(y, v) for y, v, _ in result.entries] == [(2001, 12.0), (2002, 15.0)]

    def test_low_coverage_year_excluded_and_reported(self):
        levels = self._levels([(2003, [10.0] * 180 + [None] * 185)])
        result = annual_maxima(levels, min_coverage=0.8)
        assert result.entries == []
        assert len(result.excluded) == 1
        assert result.excluded[0][0] == 2003
        assert result.excluded[0][1] == pytest.approx(180 / 365)

    def test_max_equals_bruteforce(self, shipped_maxima, repo_config):
        # brute force over the parsed daily series for a few years
        from floodelev import hydro
        with open(repo_config.path("discharge_rdb")) as fh:
            series = hydro.parse_usgs_rdb(fh.read())
        curve = hydro.RatingCurve.from_csv(repo_config.path("rating_curve"))
        levels = hydro.stage_series(curve, series)
        for target_year in (1937, 1972, 2011):
            brute = max(v for d, v in levels.records
                        if d.year == target_year and v is not None)
            got = dict((y, v) for y, v, _ in shipped_maxima.entries)[target_year]
            assert got == pytest.approx(brute, rel=1e-12)

    def test_water_year_bucketing(self):
        records = [(dt.date(2000, 10, 5), 20.0), (dt.date(2001, 3, 1), 10.0)]
        result = annual_maxima(WaterLevelSeries(records), min_coverage=0.0,
                               water_year=True)
        assert [y for y, _, _ in result.entries] == [2001]
        assert result.entries[0][1] == 20.0

    def test_csv_roundtrip(self, tmp_path):
        m = AnnualMaxima([(2000, 12.5, 1.0), (2001, 13.0, 0.95)])
        path = tmp_path / "am.csv"
        m.to_csv(path)
        again = AnnualMaxima.from_csv(path)
        assert again.entries == m.entries
