import numpy as np
import pytest
from scipy import stats

from floodelev.discount import ModelKind, discount_factors_stochastic
from floodelev.exposure import LifetimeDist
from floodelev.sow import (ALL_SCENARIOS, DAMAGE_MODELS, MOST_LIKELY_SCENARIO,
                           Scenario, generate_sows, lhs_sample)


class TestLhs:
    def test_single_point(self):
        pt = lhs_sample(3, 1, np.random.default_rng(0))
        assert pt.shape == (1, 3)
        assert np.all((pt >= 0) & (pt < 1))

    def test_exact_stratification(self):
        rng = np.random.default_rng(1)
        for n in (4, 10, 57):
            m = lhs_sample(5, n, rng)
            for col in m.T:
                bins = np.floor(col * n).astype(int)
                assert sorted(bins) == list(range(n))

    def test_column_means_uniform(self):
        m = lhs_sample(6, 10_000, np.random.default_rng(2))
        assert np.all(np.abs(m.mean(axis=0) - 0.5) < 0.01)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            lhs_sample(0, 5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            lhs_sample(2, 0, np.random.default_rng(0))


class TestGenerateSows:
    def test_fixed_scenario_uniform(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            10, mode="fixed", seed=1,
                            scenario=MOST_LIKELY_SCENARIO)
        for i in range(10):
            sow = ens.sow_at(i)
            assert sow.scenario == MOST_LIKELY_SCENARIO

    def test_deep_switching_frequencies(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            60_000, mode="deep", seed=2)
        counts = ens.scenario_counts()
        assert len(counts) == 6
        for combo in counts.values():
            assert abs(combo / 60_000 - 1 / 6) < 0.01

    def test_same_seed_identical(self, small_posterior, discount_models):
        kw = dict(mode="deep", seed=3)
        a = generate_sows(small_posterior, discount_models, LifetimeDist(),
                          500, **kw)
        b = generate_sows(small_posterior, discount_models, LifetimeDist(),
                          500, **kw)
        assert np.array_equal(a.mu, b.mu)
        assert np.array_equal(a.lifetime, b.lifetime)
        assert np.array_equal(a.damage_error, b.damage_error)
        assert np.array_equal(a.rate_paths, b.rate_paths)
        assert np.array_equal(a.discount_sum, b.discount_sum)

    def test_lifetime_marginal_ks(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            10_000, mode="deep", seed=4)
        stat, pvalue = stats.kstest(ens.lifetime, stats.weibull_min(
            c=2.8, scale=73.5).cdf)
        assert pvalue > 0.01

    def test_rate_paths_cover_lifetimes(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            4000, mode="deep", seed=5)
        assert ens.rate_paths.shape[1] >= ens.lifetime.max() + 1
        assert np.all(ens.rate_paths > 0)

    def test_discount_sum_bruteforce(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            200, mode="deep", seed=6)
        for i in (0, 17, 99, 199):
            f = discount_factors_stochastic(ens.rate_paths[i])
            brute = f[: ens.lifetime[i] + 1].sum()
            assert ens.discount_sum[i] == pytest.approx(brute, rel=1e-12)

    def test_damage_error_band(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            5000, mode="deep", seed=7)
        assert np.all(np.abs(ens.damage_error) <= 0.30)
        assert abs(ens.damage_error.mean()) < 0.01

    def test_gev_rows_come_from_posterior(self, small_posterior, discount_models):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            1000, mode="deep", seed=8)
        pool = set(np.round(small_posterior.mu, 12))
        assert set(np.round(ens.mu, 12)) <= pool

    def test_bad_inputs(self, small_posterior, discount_models):
        with pytest.raises(ValueError, match="positive"):
            generate_sows(small_posterior, discount_models, LifetimeDist(),
                          0, mode="deep", seed=0)
        with pytest.raises(ValueError, match="missing fitted"):
            generate_sows(small_posterior,
                          {ModelKind.RANDOM_WALK:
                           discount_models[ModelKind.RANDOM_WALK]},
                          LifetimeDist(), 10, mode="deep", seed=0)

    def test_save_and_manifest(self, small_posterior, discount_models, tmp_path):
        ens = generate_sows(small_posterior, discount_models, LifetimeDist(),
                            50, mode="fixed", seed=9,
                            scenario=Scenario("JRC", ModelKind.RANDOM_WALK))
        csv_path = tmp_path / "sows.csv"
        manifest_path = tmp_path / "sows.json"
        ens.save(csv_path, manifest_path)
        text = csv_path.read_text().splitlines()
        assert len(text) == 51
        assert "JRC" in text[1] and "random_walk" in text[1]
        import json
        manifest = json.loads(manifest_path.read_text())
        assert manifest["seed"] == 9 and manifest["size"] == 50
        assert manifest["scenario"]["damage_model"] == "JRC"

    def test_all_scenarios_constant(self):
        assert len(ALL_SCENARIOS) == 6
        assert MOST_LIKELY_SCENARIO.damage_model == "HAZUS"
        assert MOST_LIKELY_SCENARIO.discount_model is ModelKind.BACKGROUND_TREND
