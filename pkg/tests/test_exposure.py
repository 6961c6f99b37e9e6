import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from floodelev.exposure import (CostBand, DepthDamageCurve, ElevationCostModel,
                                House, LifetimeDist, damage_fraction,
                                elevation_cost, flood_damage, sample_lifetime)

HOUSE = House(value=300_000.0, size_sqft=1500.0, floor_rel_bfe=-4.0)


def simple_curve():
    # no-basement convention: zero damage until water reaches the floor
    return DepthDamageCurve("TEST", np.array([-1.0, 0.0, 2.0, 10.0]),
                            np.array([0.0, 0.0, 0.5, 0.9]))


class TestDamageFraction:
    def test_below_table_is_zero(self):
        assert damage_fraction(simple_curve(), -3.0) == 0.0

    def test_knot_exact_with_zero_error(self):
        assert damage_fraction(simple_curve(), 2.0, 0.0) == pytest.approx(0.5)

    def test_clamp_at_one(self):
        curve = DepthDamageCurve("TEST", np.array([0.0, 5.0]),
                                 np.array([0.0, 0.9]))
        assert damage_fraction(curve, 5.0, 0.3) == pytest.approx(
            min(1.0, 0.9 * 1.3))
        assert damage_fraction(curve, 5.0, 0.3) == 1.0

    def test_above_table_holds_last_value(self):
        assert damage_fraction(simple_curve(), 50.0) == pytest.approx(0.9)

    def test_error_outside_band_rejected(self):
        with pytest.raises(ValueError):
            damage_fraction(simple_curve(), 1.0, 0.31)

    @given(st.floats(-20, 40), st.floats(-0.3, 0.3))
    @settings(max_examples=500)
    def test_fraction_in_unit_interval(self, depth, err):
        f = damage_fraction(simple_curve(), depth, err)
        assert 0.0 <= f <= 1.0

    def test_shipped_curves_valid(self, damage_curves):
        assert set(damage_curves) == {"HAZUS", "JRC"}
        for curve in damage_curves.values():
            assert np.all(np.diff(curve.depths_ft) > 0)
            assert np.all(np.diff(curve.fractions) >= 0)
            assert curve.error_halfwidth == 0.30


class TestFloodDamage:
    def test_water_below_elevated_floor(self):
        # floor raised 5 ft; crest 0.5 ft above BFE is below the new floor
        assert flood_damage(simple_curve(), HOUSE, 0.5, 5.0) == 0.0

    def test_fraction_times_value(self):
        curve = DepthDamageCurve("TEST", np.array([0.0, 4.0]),
                                 np.array([0.0, 1.0]))
        # depth = 2 -> fraction 0.5 -> $150K
        assert flood_damage(curve, HOUSE, -2.0, 0.0) == pytest.approx(150_000.0)

    def test_composition_oracle(self):
        rng = np.random.default_rng(8)
        curve = simple_curve()
        for _ in range(1000):
            wl = rng.uniform(-12, 15)
            h = rng.choice([0.0, rng.uniform(3, 14)])
            err = rng.uniform(-0.3, 0.3)
            expected = damage_fraction(
                curve, wl - (HOUSE.floor_rel_bfe + h), err) * HOUSE.value
            assert flood_damage(curve, HOUSE, wl, h, err) == pytest.approx(expected)

    @given(st.floats(3, 14), st.floats(3, 14), st.floats(-8, 20))
    @settings(max_examples=300)
    def test_non_increasing_in_lift(self, h1, h2, wl):
        lo, hi = min(h1, h2), max(h1, h2)
        assert flood_damage(simple_curve(), HOUSE, wl, hi) <= \
               flood_damage(simple_curve(), HOUSE, wl, lo) + 1e-9


class TestElevationCost:
    model = ElevationCostModel()

    def test_zero_lift_is_free(self):
        assert elevation_cost(self.model, HOUSE, 0.0) == 0.0

    def test_sample_house_five_and_a_half_feet(self):
        assert elevation_cost(self.model, HOUSE, 5.5) == pytest.approx(144_495.0)

    def test_sample_house_mid_band(self):
        got = elevation_cost(self.model, HOUSE, 8.8)
        assert got == pytest.approx(150_120.0)
        assert abs(got - 152_000.0) < 3_000.0

    def test_interp_mode_near_published_curve(self):
        interp = ElevationCostModel(mode="interp")
        # smooth-rate pricing lands close to the banded figure
        assert elevation_cost(interp, HOUSE, 5.5) == pytest.approx(
            20_745 + (82.5 + 3.75 * 0.5 / 3.5) * 1500)
        assert abs(elevation_cost(interp, HOUSE, 8.8) - 152_000) < 1_000

    def test_infeasible_range_rejected(self):
        for h in (0.5, 2.9, 14.1, -1.0):
            with pytest.raises(ValueError):
                elevation_cost(self.model, HOUSE, h)

    def test_below_min_priced_when_allowed(self):
        got = elevation_cost(self.model, HOUSE, 1.5, allow_below_min=True)
        assert got == pytest.approx(20_745 + 82.5 * 1500)

    @given(st.floats(3, 14), st.floats(3, 14))
    @settings(max_examples=300)
    def test_non_decreasing_in_lift(self, h1, h2):
        lo, hi = min(h1, h2), max(h1, h2)
        for mode in ("step", "interp"):
            m = ElevationCostModel(mode=mode)
            assert elevation_cost(m, HOUSE, lo) <= \
                   elevation_cost(m, HOUSE, hi) + 1e-9

    def test_non_decreasing_in_size(self):
        small = House(300_000, 1000, -4)
        large = House(300_000, 3000, -4)
        assert elevation_cost(self.model, small, 5.0) < \
               elevation_cost(self.model, large, 5.0)

    def test_json_roundtrip(self, tmp_path):
        path = tmp_path / "cost.json"
        self.model.to_json(path)
        again = ElevationCostModel.from_json(path)
        assert again.fixed_fee == self.model.fixed_fee
        assert again.bands == self.model.bands

    def test_decreasing_band_rates_rejected(self):
        with pytest.raises(ValueError):
            ElevationCostModel(bands=(CostBand(3, 7, 90.0), CostBand(7, 10, 80.0)))


class TestLifetime:
    def test_fixed_is_constant(self):
        dist = LifetimeDist(kind="fixed", fixed_years=30)
        rng = np.random.default_rng(0)
        assert all(sample_lifetime(dist, rng) == 30 for _ in range(20))

    def test_weibull_mean_matches_analytic(self):
        dist = LifetimeDist()
        rng = np.random.default_rng(3)
        draws = dist.ppf(rng.random(1_000_000))
        analytic = 73.5 * math.gamma(1 + 1 / 2.8)
        assert analytic == pytest.approx(65.4, abs=0.1)
        assert abs(draws.mean() - analytic) < 0.5

    def test_quantiles_match_distribution(self):
        # the sampler's 5th/95th percentiles against the Weibull's own
        dist = LifetimeDist()
        rng = np.random.default_rng(4)
        draws = dist.ppf(rng.random(400_000))
        ref = stats.weibull_min(c=2.8, scale=73.5)
        q05, q95 = np.quantile(draws, [0.05, 0.95])
        assert abs(q05 - ref.ppf(0.05)) <= 1.0
        assert abs(q95 - ref.ppf(0.95)) <= 1.0

    def test_draws_integral_and_positive(self):
        dist = LifetimeDist()
        rng = np.random.default_rng(5)
        draws = dist.ppf(rng.random(10_000))
        assert draws.dtype.kind == "i"
        assert draws.min() >= 1

    def test_mean_years_property(self):
        assert LifetimeDist(kind="fixed").mean_years == 30.0
        assert LifetimeDist().mean_years == pytest.approx(65.45, abs=0.05)
