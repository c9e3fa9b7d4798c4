import numpy as np
import pytest

from vacsmf.polya_gamma import PgParams, draw_pg, pg_mean, pg_var, sample_pg


def series_mean(b, c, terms=100_000):
    """Oracle: truncated mean of the infinite weighted sum of Gamma(b, 1) terms."""
    k = np.arange(1, terms + 1)
    denom = (k - 0.5) ** 2 + c * c / (4.0 * np.pi**2)
    return b / (2.0 * np.pi**2) * np.sum(1.0 / denom)


def series_var(b, c, terms=100_000):
    k = np.arange(1, terms + 1)
    denom = (k - 0.5) ** 2 + c * c / (4.0 * np.pi**2)
    return b / (4.0 * np.pi**4) * np.sum(1.0 / denom**2)


def sample_series_oracle(b, c, n, rng, terms=400):
    """Draws from the truncated sum-of-gammas representation (bias-corrected mean)."""
    k = np.arange(1, terms + 1)
    denom = (k - 0.5) ** 2 + c * c / (4.0 * np.pi**2)
    g = rng.gamma(b, 1.0, size=(n, terms))
    draws = (g / denom).sum(axis=1) / (2.0 * np.pi**2)
    return draws * (pg_mean(b, c) / series_mean(b, c, terms))


class TestMoments:
    def test_mean_limits(self):
        assert pg_mean(1, 0.0) == 0.25
        assert pg_mean(4, 0.0) == 1.0

    def test_mean_tanh(self):
        assert abs(pg_mean(1, 2.0) - np.tanh(1.0) / 4.0) < 1e-15
        assert abs(pg_mean(1, 2.0) - 0.1903) < 1e-3

    def test_against_series_oracle(self):
        for b, c in [(1, 0.0), (1, 2.0), (3, 0.5), (5, -3.0), (50, 3.0)]:
            assert abs(pg_mean(b, c) - series_mean(b, c)) < 1e-5 * max(1.0, b)
            assert abs(pg_var(b, c) - series_var(b, c)) < 1e-6 * max(1.0, b)

    def test_small_c_continuity(self):
        assert abs(pg_mean(2, 1e-5) - pg_mean(2, 2e-4)) < 1e-8
        assert abs(pg_var(2, 1e-5) - pg_var(2, 2e-4)) < 1e-8

    def test_params_type(self):
        p = PgParams(b=2, c=1.5)
        assert p.mean() == pg_mean(2, 1.5)
        assert p.var() == pg_var(2, 1.5)
        with pytest.raises(ValueError):
            PgParams(b=0, c=1.0)
        with pytest.raises(ValueError):
            PgParams(b=2, c=float("inf"))


class TestSampler:
    def test_rejects_zero_shape(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError, match=">= 1"):
            draw_pg(np.array([1, 0]), np.zeros(2), rng)

    def test_strictly_positive(self):
        rng = np.random.default_rng(1)
        d = draw_pg(np.array([1, 5, 31, 100]), np.array([0.0, -2.0, 5.0, 0.0]), rng)
        assert np.all(d > 0)

    def test_determinism(self):
        b = np.array([1, 3, 40])
        c = np.array([0.5, -1.0, 2.0])
        d1 = draw_pg(b, c, np.random.default_rng(99))
        d2 = draw_pg(b, c, np.random.default_rng(99))
        np.testing.assert_array_equal(d1, d2)

    def test_unit_shape_mean_hand_values(self):
        rng = np.random.default_rng(2)
        d = draw_pg(np.ones(100_000, dtype=int), np.zeros(100_000), rng)
        assert abs(d.mean() - 0.25) < 0.01
        d = draw_pg(np.ones(100_000, dtype=int), np.full(100_000, 2.0), rng)
        assert abs(d.mean() - np.tanh(1.0) / 4.0) < 0.01

    def test_matches_series_oracle_distribution(self):
        rng = np.random.default_rng(5)
        n = 40_000
        mine = draw_pg(np.full(n, 2), np.full(n, 1.0), rng)
        oracle = sample_series_oracle(2, 1.0, n, rng)
        se = np.sqrt(mine.var() / n + oracle.var() / n)
        assert abs(mine.mean() - oracle.mean()) < 4 * se

    def test_additivity_in_shape(self):
        rng = np.random.default_rng(7)
        n = 60_000
        summed = draw_pg(np.full(n // 3, 1), np.full(n // 3, 1.5), rng)
        summed = summed.reshape(-1)
        triple = draw_pg(np.full(n // 3, 3), np.full(n // 3, 1.5), rng)
        # same distribution: compare first two moments
        se_m = np.sqrt(3 * pg_var(1, 1.5) / (n // 3) * 2)
        assert abs(triple.mean() - 3 * pg_mean(1, 1.5)) < 4 * np.sqrt(pg_var(3, 1.5) / (n // 3))
        assert abs(triple.mean() - 3 * summed.mean() / 1) < 0.05

    def test_scalar_api(self):
        rng = np.random.default_rng(11)
        x = sample_pg(PgParams(b=3, c=0.7), rng)
        assert isinstance(x, float) and x > 0

    @pytest.mark.parametrize("b", [1, 5, 50])
    @pytest.mark.parametrize("c", [0.0, 0.5, -0.5, 3.0, -3.0])
    def test_moment_grid_quick(self, b, c):
        # reduced-size version of the acceptance criterion
        rng = np.random.default_rng(abs(hash((b, c))) % 2**32)
        n = 20_000
        d = draw_pg(np.full(n, b), np.full(n, c), rng)
        se_mean = d.std() / np.sqrt(n)
        assert abs(d.mean() - pg_mean(b, c)) < 4 * se_mean
        m4 = ((d - d.mean()) ** 4).mean()
        se_var = np.sqrt(max(m4 - d.var() ** 2, 1e-30) / n)
        assert abs(d.var() - pg_var(b, c)) < 4 * se_var
