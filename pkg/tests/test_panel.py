import math

import numpy as np
import pytest

from ar1agg import BudgetError, ConfigError
from ar1agg import levy, mixing, panel


GAUSS = levy.LevyTriplet(sigma=1.0)
GAMMA = levy.LevyTriplet(0.0, levy.CenteredGamma(1.0, 1.0))


def make_cfg(**kw):
    base = dict(
        n_micro=100, n_time=500, seed=17,
        mixing=mixing.BetaEdge(0.75), triplet=GAMMA,
    )
    base.update(kw)
    return panel.PanelConfig(**base)


class TestStationaryInit:
    def test_zero_coefficient_is_single_increment(self):
        rng = np.random.default_rng(0)
        vals = np.array(
            [panel.stationary_init(0.0, GAUSS, 1.0, 1e-10, rng)[0] for _ in range(5000)]
        )
        assert vals.var() == pytest.approx(1.0, rel=0.08)

    def test_variance_geometric_series(self):
        rng = np.random.default_rng(1)
        vals = np.array(
            [panel.stationary_init(0.5, GAUSS, 1.0, 1e-10, rng)[0]
             for _ in range(200_000)]
        )
        assert vals.var() == pytest.approx(4.0 / 3.0, rel=0.02)

    def test_truncation_length(self):
        assert panel.truncation_length(0.9, 1e-8) == 175
        assert panel.truncation_length(0.0, 1e-8) == 0

    def test_cap_reports_bias(self):
        rng = np.random.default_rng(2)
        a = 1.0 - 1e-9  # needs far more than the cap of 1e6 terms
        _, bound = panel.stationary_init(a, GAUSS, 1.0, 1e-10, rng)
        assert bound > 0.0

    def test_invalid_coefficient(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ConfigError):
            panel.stationary_init(1.0, GAUSS, 1.0, 1e-10, rng)


class TestMicroPath:
    def test_deterministic_increment_hook(self):
        rng = np.random.default_rng(0)
        x = panel.simulate_micro_path(0.5, GAUSS, 1.0, 6, 0.0, rng,
                                      increments=np.ones(6))
        # X(t) = 2 (1 - 2^{-t})
        assert x[2] == pytest.approx(1.75)
        assert np.allclose(x, 2.0 * (1.0 - 0.5 ** np.arange(1, 7)))

    def test_zero_coefficient_returns_increments(self):
        rng = np.random.default_rng(1)
        eps = rng.normal(size=20)
        x = panel.simulate_micro_path(0.0, GAUSS, 1.0, 20, 5.0, rng,
                                      increments=eps)
        assert np.allclose(x, eps)

    def test_stationary_variance_preserved(self):
        rng = np.random.default_rng(2)
        finals = []
        for _ in range(100_000):
            init, _ = panel.stationary_init(0.5, GAUSS, 1.0, 1e-12, rng)
            finals.append(0.5 * init + rng.normal())
        assert np.var(finals) == pytest.approx(4.0 / 3.0, rel=0.02)


class TestAggregate:
    def test_point_mass_zero_single_unit(self):
        cfg = make_cfg(n_micro=1, mixing=mixing.PointMass(0.0), triplet=GAUSS,
                       n_time=50)
        s = panel.simulate_aggregate(cfg)
        # a = 0: the aggregate is the raw increment sequence (dt = 1)
        assert s.values.shape == (50,)
        assert s.values.std() == pytest.approx(1.0, rel=0.35)

    def test_thread_count_invariance(self):
        cfg = make_cfg(n_micro=600, n_time=300)
        s1 = panel.simulate_aggregate(cfg, threads=1)
        s3 = panel.simulate_aggregate(cfg, threads=3)
        assert np.array_equal(s1.values, s3.values)

    def test_repeat_run_bit_exact(self):
        cfg = make_cfg()
        a = panel.simulate_aggregate(cfg).values
        b = panel.simulate_aggregate(cfg).values
        assert np.array_equal(a, b)

    def test_seed_changes_output(self):
        a = panel.simulate_aggregate(make_cfg(seed=1)).values
        b = panel.simulate_aggregate(make_cfg(seed=2)).values
        assert not np.array_equal(a, b)

    def test_variance_and_autocovariance_match_theory(self):
        cfg = make_cfg(n_micro=1500, n_time=30_000)
        s = panel.simulate_aggregate(cfg)
        xc = s.values - s.values.mean()
        n = xc.size
        for j in (0, 1, 2, 4, 8):
            r_hat = np.dot(xc[: n - j], xc[j:]) / n
            r_th = mixing.theoretical_r(cfg.mixing, j, s.sigma_w2_true)
            # batch-means error bars on a strongly dependent series
            prods = xc[: n - j] * xc[j:]
            bm = prods[: (prods.size // 30) * 30].reshape(30, -1).mean(axis=1)
            se = bm.std(ddof=1) / math.sqrt(30)
            assert abs(r_hat - r_th) < 4 * se

    def test_stationarity_halves(self):
        cfg = make_cfg(n_micro=800, n_time=20_000, triplet=GAUSS)
        v = panel.simulate_aggregate(cfg).values
        half = v.size // 2
        v1, v2 = v[:half], v[half:]
        pooled = math.sqrt(v1.var() + v2.var())
        assert abs(v1.mean() - v2.mean()) < 0.25 * pooled
        assert v1.var() == pytest.approx(v2.var(), rel=0.5)

    def test_burnin_scheme(self):
        cfg = make_cfg(init=panel.ZeroPlusBurnin(steps=200), n_time=400)
        s = panel.simulate_aggregate(cfg)
        assert s.values.shape == (400,)
        assert s.truncation_bias_bound == 0.0

    def test_budget_guard(self):
        cfg = make_cfg(n_micro=10**6, n_time=10**5)
        with pytest.raises(BudgetError):
            panel.simulate_aggregate(cfg)

    def test_sigma_w2_echo(self):
        s = panel.simulate_aggregate(make_cfg(n_time=10))
        assert s.sigma_w2_true == pytest.approx(1.0)


class TestConfigRoundTrip:
    def test_dict_round_trip(self):
        cfg = make_cfg(init=panel.TruncatedSeries(tol=1e-8))
        again = panel.PanelConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_burnin_round_trip(self):
        cfg = make_cfg(init=panel.ZeroPlusBurnin(steps=7))
        assert panel.PanelConfig.from_dict(cfg.to_dict()) == cfg

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            make_cfg(n_micro=0)
        with pytest.raises(ConfigError):
            make_cfg(seed=-1)
        with pytest.raises(ConfigError):
            panel.TruncatedSeries(tol=2.0)
        with pytest.raises(ConfigError):
            panel.ZeroPlusBurnin(steps=0)
        with pytest.raises(ConfigError):
            panel.PanelConfig.from_dict({"n_micro": 1})


class TestCsv:
    def test_series_csv_format(self, tmp_path):
        s = panel.simulate_aggregate(make_cfg(n_time=5))
        path = tmp_path / "series.csv"
        panel.write_series_csv(s, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,value"
        assert len(lines) == 6
        t, v = lines[3].split(",")
        assert t == "3"
        assert float(v) == s.values[2]

    def test_csv_round_trips_exact_floats(self, tmp_path):
        s = panel.simulate_aggregate(make_cfg(n_time=50))
        path = tmp_path / "series.csv"
        panel.write_series_csv(s, path)
        back = [float(line.split(",")[1])
                for line in path.read_text().splitlines()[1:]]
        assert np.array_equal(np.array(back), s.values)
