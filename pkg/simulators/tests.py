"""Tests for the simulators (Poisson, Hawkes thinning, Neyman-Scott clusters, replicates)."""
from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy import stats

from pointprocess import bin_counts, validate_stream
from pointprocess.errors import (
    ConfigError,
    InvalidParameter,
    NegativeRate,
    UnstableKernel,
)
from pointprocess.kernels import BoxKernel, ExponentialKernel, ZeroKernel
from simulators import get_simulator, split_model_spec
from simulators.hawkes import HawkesParams, simulate_hawkes, simulate_hawkes_path
from simulators.neyman_scott import NeymanScottParams, simulate_neyman_scott
from simulators.poisson import simulate_poisson
from simulators.replicates import simulate_replicates
from simulators.rng import make_rng, replicate_seed


def assert_valid(testcase, stream):
    again = validate_stream(stream.times, stream.marks, stream.horizon, stream.dim, stream.start)
    testcase.assertEqual(again, stream)


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------


class TestRng(SimpleTestCase):
    def test_rejects_negative_seed(self):
        with self.assertRaises(InvalidParameter):
            make_rng(-1)

    def test_rejects_oversized_seed(self):
        with self.assertRaises(InvalidParameter):
            make_rng(2**64)

    def test_accepts_full_64_bit_range(self):
        make_rng(2**64 - 1)

    def test_replicate_seed_wraps(self):
        self.assertEqual(replicate_seed(2**64 - 1, 2), 1)


# ---------------------------------------------------------------------------
# Poisson
# ---------------------------------------------------------------------------


class TestSimulatePoisson(SimpleTestCase):
    def test_zero_rate_is_empty(self):
        self.assertEqual(len(simulate_poisson([0.0], 100.0, seed=1)), 0)

    def test_count_within_three_sigma(self):
        stream = simulate_poisson([1.0], 1000.0, seed=7)
        self.assertTrue(905 <= len(stream) <= 1095, len(stream))
        assert_valid(self, stream)

    def test_same_seed_same_stream(self):
        a = simulate_poisson([1.0, 0.5], 200.0, seed=42)
        b = simulate_poisson([1.0, 0.5], 200.0, seed=42)
        self.assertEqual(a, b)

    def test_different_seed_different_stream(self):
        a = simulate_poisson([1.0], 200.0, seed=42)
        b = simulate_poisson([1.0], 200.0, seed=43)
        self.assertNotEqual(a, b)

    def test_negative_rate(self):
        with self.assertRaises(NegativeRate):
            simulate_poisson([1.0, -0.1], 10.0, seed=0)

    def test_marks_follow_rates(self):
        stream = simulate_poisson([1.0, 3.0], 2000.0, seed=5)
        counts = stream.counts_per_mark()
        self.assertLess(abs(counts[1] / 2000 - 3.0), 4 * math.sqrt(3.0 / 2000))


# ---------------------------------------------------------------------------
# Hawkes
# ---------------------------------------------------------------------------


class TestHawkesParams(SimpleTestCase):
    def test_unstable_kernel_reports_radius(self):
        params = HawkesParams([0.5], ExponentialKernel(1.1, 1.0))
        with self.assertRaises(UnstableKernel) as ctx:
            simulate_hawkes(params, 10.0, seed=0)
        self.assertAlmostEqual(ctx.exception.details["spectral_radius"], 1.1)

    def test_multivariate_radius(self):
        kernel = ExponentialKernel([[0.5, 0.6], [0.6, 0.5]], 1.0)
        with self.assertRaises(UnstableKernel):
            HawkesParams([0.1, 0.1], kernel).check_stability()

    def test_negative_kernel_rejected(self):
        with self.assertRaises(InvalidParameter):
            HawkesParams([0.5], ExponentialKernel(-0.2, 1.0))

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidParameter):
            HawkesParams([0.5, 0.5], ExponentialKernel(0.2, 1.0))

    def test_stationary_rates(self):
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        self.assertAlmostEqual(params.stationary_rates()[0], 2.5)

    def test_parse_from_spec(self):
        simulator, params = split_model_spec(
            {"type": "hawkes", "baseline": [0.5], "kernel": {"type": "exponential", "alpha": 0.8, "beta": 1.0}}
        )
        self.assertEqual(simulator.key, "hawkes")
        self.assertAlmostEqual(params.branching_ratio, 0.8)

    def test_parse_rejects_unstable(self):
        with self.assertRaises(UnstableKernel):
            get_simulator("hawkes").parse_params(
                {"baseline": [0.5], "kernel": {"type": "exponential", "alpha": 1.0, "beta": 1.0}}
            )


class TestSimulateHawkes(SimpleTestCase):
    def test_zero_kernel_matches_poisson_count(self):
        params = HawkesParams([1.0], ZeroKernel(1))
        stream = simulate_hawkes(params, 1000.0, seed=3)
        self.assertTrue(905 <= len(stream) <= 1095, len(stream))

    def test_zero_kernel_bin_counts_are_poisson(self):
        """Mean and variance of bin counts agree, as for Poisson(eta)."""
        hawkes = simulate_hawkes(HawkesParams([1.0], ZeroKernel(1)), 5000.0, seed=11)
        poisson = simulate_poisson([1.0], 5000.0, seed=12)
        for stream in (hawkes, poisson):
            counts = bin_counts(stream, 1.0)[:, 0]
            self.assertLess(abs(counts.mean() - 1.0), 4 * math.sqrt(1.0 / 5000))
            self.assertLess(abs(counts.var() - 1.0), 4 * math.sqrt(3.0 / 5000))

    def test_deterministic(self):
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        self.assertEqual(simulate_hawkes(params, 100.0, seed=9), simulate_hawkes(params, 100.0, seed=9))

    def test_stream_is_valid_and_starts_at_zero(self):
        params = HawkesParams([0.3, 0.2], ExponentialKernel([[0.3, 0.1], [0.2, 0.4]], 1.5))
        path = simulate_hawkes_path(params, 300.0, seed=4)
        assert_valid(self, path.stream)
        self.assertTrue(np.all(path.history_times < 0))
        self.assertEqual(path.burn_in, params.default_burn_in())

    def test_long_run_rate(self):
        """Retained-window rate is within 3 standard errors of eta / (1 - int K)."""
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        stream = simulate_hawkes(params, 4000.0, seed=21)
        # Var N(T) / T -> lambda / (1 - int K)^2 for a stationary Hawkes process.
        se = math.sqrt(2.5 / 0.2**2 / 4000.0)
        self.assertLess(abs(len(stream) / 4000.0 - 2.5), 3 * se)

    def test_intensity_trace_jumps_at_events(self):
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        path = simulate_hawkes_path(params, 200.0, seed=2)
        t = path.stream.times[len(path.stream) // 2]
        before, after = path.intensity([t, t + 1e-12])[:, 0]
        self.assertAlmostEqual(after - before, 0.8, places=6)

    def test_intensity_trace_is_baseline_plus_sum(self):
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0, support=10.0))
        path = simulate_hawkes_path(params, 100.0, seed=8)
        t = 50.0
        events = np.concatenate([path.history_times, path.stream.times])
        lags = t - events[events < t]
        lags = lags[lags < 10.0]
        expected = 0.5 + np.sum(0.8 * np.exp(-lags))
        self.assertAlmostEqual(path.intensity([t])[0, 0], expected, places=12)

    def test_explicit_burn_in(self):
        params = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))
        path = simulate_hawkes_path(params, 10.0, seed=1, burn_in=0.0)
        self.assertEqual(path.history_times.size, 0)
        self.assertAlmostEqual(path.intensity([0.0])[0, 0], 0.5)


# ---------------------------------------------------------------------------
# Neyman-Scott
# ---------------------------------------------------------------------------


class TestSimulateNeymanScott(SimpleTestCase):
    def test_zero_shot_kernel_is_empty(self):
        params = NeymanScottParams([1.0], ZeroKernel(1))
        self.assertEqual(len(simulate_neyman_scott(params, 100.0, seed=1)), 0)

    def test_observed_count(self):
        """nu=1, int Theta=2: count near 2000 within 4 sigma, sigma^2 = nu (m + m^2) T."""
        params = NeymanScottParams([1.0], BoxKernel(1.0, 2.0))
        stream = simulate_neyman_scott(params, 1000.0, seed=17)
        sigma = math.sqrt(1.0 * (2.0 + 4.0) * 1000.0)
        self.assertLess(abs(len(stream) - 2000), 4 * sigma)
        assert_valid(self, stream)

    def test_deterministic(self):
        params = NeymanScottParams([0.5], BoxKernel(1.5, 2.0))
        self.assertEqual(
            simulate_neyman_scott(params, 100.0, seed=3), simulate_neyman_scott(params, 100.0, seed=3)
        )

    def test_negative_latent_rate(self):
        with self.assertRaises(NegativeRate):
            NeymanScottParams([-1.0], BoxKernel(1.0, 1.0))

    def test_unbounded_shot_kernel_rejected(self):
        with self.assertRaises(InvalidParameter):
            NeymanScottParams([1.0], ExponentialKernel(1.0, 1.0))

    def test_children_follow_parents(self):
        """Every observed event lies within the shot support after some latent point."""
        params = NeymanScottParams([0.2], BoxKernel(1.0, 0.5))
        observed, latent = simulate_neyman_scott(params, 200.0, seed=6, return_latent=True)
        idx = np.searchsorted(latent.times, observed.times, side="right") - 1
        # Clusters straddling 0 come from latent points before the window.
        inside = idx >= 0
        gaps = observed.times[inside] - latent.times[idx[inside]]
        self.assertTrue(np.all(gaps < 0.5))

    def test_stationary_rates(self):
        params = NeymanScottParams([0.5, 1.0], BoxKernel([[1.0, 0.0], [0.5, 2.0]], 1.0))
        np.testing.assert_allclose(params.stationary_rates(), [1.0, 2.0])

    @tag("slow")
    def test_latent_stream_is_poisson(self):
        """Pooled latent bin counts pass a chi-square test at the 0.1% level."""
        params = NeymanScottParams([1.0], BoxKernel(1.5, 2.0))
        counts = []
        for r in range(200):
            _, latent = simulate_neyman_scott(params, 50.0, seed=1000 + r, return_latent=True)
            counts.append(bin_counts(latent, 1.0)[:, 0])
        counts = np.concatenate(counts)
        cells = np.minimum(counts, 5)
        observed = np.bincount(cells, minlength=6)
        pmf = stats.poisson.pmf(np.arange(5), 1.0)
        expected = counts.size * np.append(pmf, 1 - pmf.sum())
        self.assertGreater(stats.chisquare(observed, expected).pvalue, 1e-3)


# ---------------------------------------------------------------------------
# Registry and replicates
# ---------------------------------------------------------------------------


class TestReplicates(SimpleTestCase):
    def test_unknown_model(self):
        with self.assertRaises(ConfigError):
            get_simulator("cox")

    def test_replicates_use_offset_seeds(self):
        params = get_simulator("poisson").parse_params({"rates": [1.0]})
        streams = simulate_replicates("poisson", params, 50.0, seed=100, n=3, workers=1)
        for r, stream in enumerate(streams):
            self.assertEqual(stream, simulate_poisson([1.0], 50.0, seed=100 + r))

    def test_pool_preserves_order(self):
        params = get_simulator("poisson").parse_params({"rates": [1.0]})
        serial = simulate_replicates("poisson", params, 50.0, seed=7, n=4, workers=1)
        pooled = simulate_replicates("poisson", params, 50.0, seed=7, n=4, workers=2)
        self.assertEqual(serial, pooled)
