"""Tests for moment estimation and the covariance oracles."""
from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase, tag

from moments import (
    bootstrap_covariance_se,
    estimate_covariance_density,
    estimate_mean_rates,
    estimate_moments,
    exponential_hawkes_covariance_oracle,
    hawkes_covariance_oracle,
    neyman_scott_covariance_oracle,
    pair_counts,
    random_stationary_covariance,
)
from moments.oracles import exponential_hawkes_density
from pointprocess import LagGrid, validate_stream
from pointprocess.errors import (
    EmptyInput,
    GridTooCoarse,
    InvalidParameter,
    NonPositiveRate,
    UnstableKernel,
)
from pointprocess.kernels import BoxKernel, ExponentialKernel, TriangularKernel, ZeroKernel
from simulators.hawkes import HawkesParams
from simulators.neyman_scott import NeymanScottParams
from simulators.poisson import simulate_poisson
from simulators.replicates import simulate_replicates


def dyadic_stream(seed, n=300, horizon=64.0, dim=2):
    """Random stream whose times are multiples of 1/64, so shifts and reversal are exact."""
    rng = np.random.default_rng(seed)
    ticks = np.sort(rng.choice(np.arange(1, int(horizon * 64)), size=n, replace=False))
    return validate_stream(ticks / 64.0, rng.integers(0, dim, n), horizon, dim)


# ---------------------------------------------------------------------------
# Mean rates
# ---------------------------------------------------------------------------


class TestEstimateMeanRates(SimpleTestCase):
    def test_count_over_time(self):
        stream = validate_stream(np.arange(10) * 0.5, np.zeros(10), 5.0, 1)
        np.testing.assert_allclose(estimate_mean_rates([stream]), [2.0])

    def test_empty_stream_gives_zero_with_warning(self):
        with self.assertLogs("moments.estimators", level="WARNING"):
            rates = estimate_mean_rates([validate_stream([], [], 10.0, 2)])
        np.testing.assert_array_equal(rates, [0.0, 0.0])

    def test_no_streams(self):
        with self.assertRaises(EmptyInput):
            estimate_mean_rates([])

    def test_poisson_rate(self):
        rate = estimate_mean_rates([simulate_poisson([3.0], 10000.0, seed=1)])[0]
        self.assertLess(abs(rate - 3.0), 3 * math.sqrt(3.0 / 10000))

    def test_pooled_over_streams(self):
        a = validate_stream([0.5, 1.5], [0, 0], 2.0, 1)
        b = validate_stream([0.5, 1.5, 2.5, 3.5], [0, 0, 0, 0], 6.0, 1)
        np.testing.assert_allclose(estimate_mean_rates([a, b]), [6.0 / 8.0])


# ---------------------------------------------------------------------------
# Pair counts and covariance density
# ---------------------------------------------------------------------------


class TestPairCounts(SimpleTestCase):
    def test_counts_ordered_pairs_by_lag(self):
        stream = validate_stream([0.0, 0.3, 1.1], [0, 1, 0], 10.0, 2)
        counts = pair_counts(stream, LagGrid(0.5, 4))
        self.assertEqual(counts[0, 0, 1], 1)  # 0.0 -> 0.3
        self.assertEqual(counts[1, 1, 0], 1)  # 0.3 -> 1.1
        self.assertEqual(counts[2, 0, 0], 1)  # 0.0 -> 1.1
        self.assertEqual(counts.sum(), 3)

    def test_self_pairs_excluded(self):
        counts = pair_counts(validate_stream([1.0], [0], 10.0, 1), LagGrid(0.5, 4))
        self.assertEqual(counts.sum(), 0)

    def test_pairs_beyond_span_ignored(self):
        counts = pair_counts(validate_stream([0.0, 2.0], [0, 0], 10.0, 1), LagGrid(0.5, 4))
        self.assertEqual(counts.sum(), 0)


class TestEstimateCovarianceDensity(SimpleTestCase):
    def test_single_event_has_no_pairs(self):
        """With no ordered pairs the density is just the centring term."""
        stream = validate_stream([3.0], [0], 10.0, 1)
        cov = estimate_covariance_density([stream], LagGrid(0.5, 4))
        np.testing.assert_allclose(cov.density[:, 0, 0], -0.01)
        np.testing.assert_allclose(cov.mean_rates, [0.1])

    def test_grid_too_coarse(self):
        stream = validate_stream([1.0, 2.0], [0, 0], 10.0, 1)
        with self.assertRaises(GridTooCoarse):
            estimate_covariance_density([stream], LagGrid(1.0, 5))

    def test_zero_rate_cannot_form_grid(self):
        with self.assertRaises(NonPositiveRate):
            estimate_covariance_density([validate_stream([1.0], [0], 10.0, 2)], LagGrid(0.5, 4))

    def test_formula_by_hand(self):
        stream = validate_stream([0.0, 0.25, 2.0, 2.25], [0, 0, 0, 0], 8.0, 1)
        cov = estimate_covariance_density([stream], LagGrid(0.5, 2))
        rate = 4 / 8.0
        # bin 0 holds the two 0.25 gaps; exposure 8 - 0.5
        self.assertAlmostEqual(cov.density[0, 0, 0], 2 / (7.5 * 0.5) - rate**2)
        self.assertAlmostEqual(cov.density[1, 0, 0], 0 / (7.0 * 0.5) - rate**2)

    def test_reversal_transposes(self):
        streams = [dyadic_stream(s) for s in range(3)]
        grid = LagGrid(0.25, 16)
        forward = estimate_covariance_density(streams, grid)
        backward = estimate_covariance_density([s.reversed() for s in streams], grid)
        np.testing.assert_array_equal(backward.density, np.swapaxes(forward.density, 1, 2))

    def test_translation_invariance(self):
        streams = [dyadic_stream(s) for s in range(3)]
        grid = LagGrid(0.25, 16)
        base = estimate_covariance_density(streams, grid)
        moved = estimate_covariance_density([s.shifted(128.0) for s in streams], grid)
        self.assertEqual(base, moved)

    def test_moment_estimate_metadata(self):
        streams = [dyadic_stream(s) for s in range(2)]
        est = estimate_moments(streams, LagGrid(0.25, 8))
        self.assertEqual(est.n_streams, 2)
        self.assertEqual(est.total_time, 128.0)

    def test_poisson_density_is_zero_within_bootstrap_error(self):
        streams = [simulate_poisson([1.0, 2.0], 400.0, seed=500 + r) for r in range(40)]
        grid = LagGrid(0.5, 10)
        cov = estimate_covariance_density(streams, grid)
        se = bootstrap_covariance_se(streams, grid, n_resamples=200, seed=1)
        self.assertTrue(np.all(np.abs(cov.density) <= 4 * se))

    def test_bootstrap_is_deterministic(self):
        streams = [dyadic_stream(s) for s in range(4)]
        grid = LagGrid(0.25, 8)
        a = bootstrap_covariance_se(streams, grid, n_resamples=20, seed=3)
        b = bootstrap_covariance_se(streams, grid, n_resamples=20, seed=3)
        np.testing.assert_array_equal(a, b)
        self.assertEqual(a.shape, (8, 2, 2))

    @tag("slow")
    def test_hawkes_estimate_matches_oracle(self):
        """200 streams of T=5000 agree with the spectral oracle within 4 bootstrap SE up to lag 10."""
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        streams = simulate_replicates("hawkes", params, 5000.0, seed=2024, n=200)
        grid = LagGrid(0.5, 20)
        cov = estimate_covariance_density(streams, grid)
        se = bootstrap_covariance_se(streams, grid, n_resamples=200, seed=7)
        oracle = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, grid)
        self.assertTrue(np.all(np.abs(cov.density - oracle.density) <= 4 * se))


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


class TestHawkesOracle(SimpleTestCase):
    def test_zero_kernel_is_poisson(self):
        cov = hawkes_covariance_oracle(0.7, ZeroKernel(1), LagGrid(0.1, 10))
        np.testing.assert_array_equal(cov.density, 0.0)
        self.assertEqual(cov.mean_rates[0], 0.7)

    def test_alpha_zero(self):
        cov = exponential_hawkes_covariance_oracle(0.5, 0.0, 1.0, LagGrid(0.1, 10))
        np.testing.assert_array_equal(cov.density, 0.0)
        self.assertEqual(cov.mean_rates[0], 0.5)

    def test_unstable(self):
        with self.assertRaises(UnstableKernel):
            exponential_hawkes_covariance_oracle(0.5, 1.0, 1.0, LagGrid(0.1, 10))

    def test_matches_closed_form(self):
        grid = LagGrid(0.02, 400)
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, grid)
        exact = exponential_hawkes_density(0.5, 0.8, 1.0, grid.lags)
        self.assertAlmostEqual(cov.mean_rates[0], 2.5)
        np.testing.assert_allclose(cov.density[:, 0, 0], exact, rtol=2e-3)

    def test_positive_and_decreasing(self):
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, LagGrid(0.05, 200))
        c = cov.density[:, 0, 0]
        self.assertTrue(np.all(c > 0))
        self.assertTrue(np.all(np.diff(c) < 0))

    def test_truncated_kernel_rate(self):
        kernel = TriangularKernel(0.8, 2.0)
        cov = hawkes_covariance_oracle(0.5, kernel, LagGrid(0.05, 100))
        self.assertAlmostEqual(cov.mean_rates[0], 0.5 / 0.2)


class TestNeymanScottOracle(SimpleTestCase):
    def test_box_kernel_triangle(self):
        params = NeymanScottParams([0.5], BoxKernel(1.5, 2.0))
        grid = LagGrid(0.02, 150)
        cov = neyman_scott_covariance_oracle(params, grid)
        expected = 0.5 * 2.25 * np.clip(2.0 - grid.lags, 0.0, None)
        np.testing.assert_allclose(cov.density[:, 0, 0], expected, atol=1e-12)
        self.assertAlmostEqual(cov.mean_rates[0], 1.5)

    def test_cross_terms_follow_orientation(self):
        """A mark-0 parent emitting into mark 1 after a delay puts mass in C_01 at positive lags."""
        kernel = BoxKernel([[1.0, 1.0], [0.0, 0.0]], [[0.5, 1.5], [1.0, 1.0]])
        params = NeymanScottParams([1.0, 1e-9], kernel)
        cov = neyman_scott_covariance_oracle(params, LagGrid(0.1, 20))
        self.assertGreater(cov.density[10, 0, 1], 0)
        self.assertEqual(cov.density[10, 1, 0], 0)

    def test_odd_oversample_rejected(self):
        params = NeymanScottParams([0.5], BoxKernel(1.5, 2.0))
        with self.assertRaises(InvalidParameter):
            neyman_scott_covariance_oracle(params, LagGrid(0.1, 10), oversample=3)


class TestRandomCovariance(SimpleTestCase):
    def test_block_toeplitz_is_positive_definite(self):
        cov = random_stationary_covariance(LagGrid(0.1, 16), 2, seed=5)
        gamma = cov.autocovariance(16)
        p, d = 17, 2
        blocks = np.empty((p, p, d, d))
        for j in range(p):
            for k in range(p):
                blocks[j, k] = gamma[k - j] if k >= j else gamma[j - k].T
        big = blocks.transpose(0, 2, 1, 3).reshape(p * d, p * d)
        self.assertGreater(np.linalg.eigvalsh(0.5 * (big + big.T)).min(), 0)

    def test_reproducible(self):
        a = random_stationary_covariance(LagGrid(0.1, 8), 2, seed=9)
        b = random_stationary_covariance(LagGrid(0.1, 8), 2, seed=9)
        self.assertEqual(a, b)
