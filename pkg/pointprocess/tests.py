"""Tests for the core types: streams, binning, kernels, grids and file formats."""
from __future__ import annotations

import math
import os
import shutil
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from pointprocess import (
    CovarianceGrid,
    EventStream,
    KernelGrid,
    LagGrid,
    bin_counts,
    build_kernel,
    sample_kernel,
    validate_stream,
)
from pointprocess.conf import get_setting, output_dir, worker_count
from pointprocess.errors import (
    ConfigError,
    InvalidParameter,
    MarkOutOfRange,
    NonIncreasingTimes,
    NonPositiveRate,
    PointProcessError,
    TimeOutOfWindow,
)
from pointprocess.formats import (
    canonical_json,
    read_covariance_grid,
    read_kernel,
    read_stream,
    write_covariance_grid,
    write_kernel,
    write_stream_csv,
)
from pointprocess.kernels import (
    BoxKernel,
    ExponentialKernel,
    SumKernel,
    TriangularKernel,
    ZeroKernel,
)


# ---------------------------------------------------------------------------
# validate_stream
# ---------------------------------------------------------------------------


class TestValidateStream(SimpleTestCase):
    def test_accepts_sorted_stream(self):
        stream = validate_stream([0.5, 1.2], [0, 1], 2.0, 2)
        self.assertEqual(len(stream), 2)
        self.assertEqual(stream.dim, 2)
        self.assertEqual(stream.horizon, 2.0)
        np.testing.assert_array_equal(stream.marks, [0, 1])

    def test_duplicate_times_rejected(self):
        with self.assertRaises(NonIncreasingTimes) as ctx:
            validate_stream([1.0, 1.0], [0, 0], 2.0, 1)
        self.assertEqual(ctx.exception.details["index"], 1)

    def test_out_of_order_times_rejected(self):
        with self.assertRaises(NonIncreasingTimes):
            validate_stream([1.5, 1.0], [0, 0], 2.0, 1)

    def test_mark_out_of_range(self):
        with self.assertRaises(MarkOutOfRange):
            validate_stream([0.5], [3], 2.0, 2)

    def test_negative_mark_rejected(self):
        with self.assertRaises(MarkOutOfRange):
            validate_stream([0.5], [-1], 2.0, 2)

    def test_time_at_horizon_rejected(self):
        """The window is half-open, so an event at T is outside it."""
        with self.assertRaises(TimeOutOfWindow):
            validate_stream([0.5, 2.0], [0, 0], 2.0, 1)

    def test_negative_time_rejected(self):
        with self.assertRaises(TimeOutOfWindow):
            validate_stream([-0.1], [0], 2.0, 1)

    def test_errors_map_to_config_exit_code(self):
        with self.assertRaises(PointProcessError) as ctx:
            validate_stream([0.5], [3], 2.0, 2)
        self.assertEqual(ctx.exception.exit_code, 2)
        self.assertEqual(ctx.exception.to_dict()["error"], "mark_out_of_range")

    def test_idempotent(self):
        stream = validate_stream([0.1, 0.4, 0.9], [1, 0, 1], 1.0, 2)
        again = validate_stream(stream.times, stream.marks, stream.horizon, stream.dim)
        self.assertEqual(stream, again)

    def test_empty_stream_is_valid(self):
        stream = validate_stream([], [], 5.0, 3)
        self.assertEqual(len(stream), 0)
        np.testing.assert_array_equal(stream.counts_per_mark(), [0, 0, 0])

    def test_arrays_are_read_only(self):
        stream = validate_stream([0.5], [0], 1.0, 1)
        with self.assertRaises(ValueError):
            stream.times[0] = 0.7


class TestStreamTransforms(SimpleTestCase):
    def setUp(self):
        self.stream = validate_stream([0.25, 1.5, 2.75], [0, 1, 0], 4.0, 2)

    def test_shift_moves_window(self):
        shifted = self.stream.shifted(10.0)
        self.assertEqual(shifted.start, 10.0)
        self.assertEqual(shifted.horizon, 14.0)
        self.assertEqual(shifted.duration, self.stream.duration)
        np.testing.assert_array_equal(shifted.times, [10.25, 11.5, 12.75])

    def test_reverse_reflects_times_and_marks(self):
        rev = self.stream.reversed()
        np.testing.assert_array_equal(rev.times, [1.25, 2.5, 3.75])
        np.testing.assert_array_equal(rev.marks, [0, 1, 0])

    def test_restrict(self):
        part = self.stream.restrict(1.0, 3.0)
        np.testing.assert_array_equal(part.times, [1.5, 2.75])
        self.assertEqual(part.start, 1.0)
        self.assertEqual(part.horizon, 3.0)

    def test_restrict_outside_window(self):
        with self.assertRaises(InvalidParameter):
            self.stream.restrict(3.0, 5.0)


# ---------------------------------------------------------------------------
# bin_counts
# ---------------------------------------------------------------------------


class TestBinCounts(SimpleTestCase):
    def test_empty_stream(self):
        counts = bin_counts(validate_stream([], [], 1.0, 2), 0.5)
        np.testing.assert_array_equal(counts, np.zeros((2, 2), dtype=int))

    def test_single_event(self):
        counts = bin_counts(validate_stream([0.3], [0], 1.0, 2), 0.5)
        np.testing.assert_array_equal(counts, [[1, 0], [0, 0]])

    def test_bin_edges_are_left_closed(self):
        counts = bin_counts(validate_stream([0.5], [0], 1.0, 1), 0.5)
        np.testing.assert_array_equal(counts[:, 0], [0, 1])

    def test_partial_last_bin(self):
        counts = bin_counts(validate_stream([0.95], [0], 1.0, 1), 0.3)
        self.assertEqual(counts.shape, (4, 1))
        self.assertEqual(counts[3, 0], 1)

    def test_totals_match_event_counts(self):
        rng = np.random.default_rng(3)
        times = np.sort(rng.uniform(0, 50, 400))
        marks = rng.integers(0, 3, 400)
        stream = validate_stream(times, marks, 50.0, 3)
        counts = bin_counts(stream, 0.7)
        self.assertEqual(counts.sum(), 400)
        np.testing.assert_array_equal(counts.sum(axis=0), stream.counts_per_mark())

    def test_shifted_window_bins_from_start(self):
        stream = validate_stream([0.3], [0], 1.0, 1).shifted(7.0)
        np.testing.assert_array_equal(bin_counts(stream, 0.5)[:, 0], [1, 0])

    def test_poisson_bin_mean(self):
        rng = np.random.default_rng(11)
        n = rng.poisson(2000)
        stream = validate_stream(np.sort(rng.uniform(0, 1000, n)), np.zeros(n), 1000.0, 1)
        counts = bin_counts(stream, 1.0)
        self.assertLess(abs(counts[:, 0].mean() - 2.0), 3 * math.sqrt(2 / 1000))

    def test_rejects_non_positive_width(self):
        with self.assertRaises(InvalidParameter):
            bin_counts(validate_stream([], [], 1.0, 1), 0.0)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


class TestKernels(SimpleTestCase):
    def test_exponential_values_and_truncation(self):
        k = ExponentialKernel(0.8, 1.0, support=2.0)
        vals = k.evaluate(np.array([-0.1, 0.0, 1.0, 2.0]))[:, 0, 0]
        np.testing.assert_allclose(vals, [0.0, 0.8, 0.8 * math.exp(-1.0), 0.0])

    def test_exponential_integral(self):
        self.assertAlmostEqual(ExponentialKernel(0.8, 1.0).integral()[0, 0], 0.8)
        truncated = ExponentialKernel(0.8, 2.0, support=1.0).integral()[0, 0]
        self.assertAlmostEqual(truncated, 0.4 * (1 - math.exp(-2.0)))

    def test_box_and_triangular_integrals(self):
        self.assertAlmostEqual(BoxKernel(1.5, 2.0).integral()[0, 0], 3.0)
        self.assertAlmostEqual(TriangularKernel(0.8, 2.0).integral()[0, 0], 0.8)

    def test_fourier_at_zero_is_integral(self):
        for kernel in (
            ExponentialKernel(0.8, 1.0),
            ExponentialKernel(0.5, 2.0, support=3.0),
            BoxKernel(1.5, 2.0),
            TriangularKernel(0.8, 2.0),
        ):
            with self.subTest(kernel=kernel.key):
                ft = kernel.fourier(np.array([0.0]))[0]
                np.testing.assert_allclose(ft.real, kernel.integral(), rtol=1e-12)
                np.testing.assert_allclose(ft.imag, 0.0, atol=1e-12)

    def test_fourier_matches_quadrature(self):
        t = (np.arange(400000) + 0.5) * 1e-4
        for kernel in (BoxKernel(1.5, 2.0), TriangularKernel(0.8, 2.0), ExponentialKernel(0.8, 1.0, support=5.0)):
            for w in (0.3, 2.0, 7.5):
                with self.subTest(kernel=kernel.key, omega=w):
                    vals = kernel.evaluate(t)[:, 0, 0]
                    numeric = 1e-4 * np.sum(vals * np.exp(-1j * w * t))
                    analytic = kernel.fourier(np.array([w]))[0, 0, 0]
                    self.assertAlmostEqual(abs(numeric - analytic), 0.0, places=4)

    def test_triangular_small_frequency_series(self):
        k = TriangularKernel(0.8, 2.0)
        w = 0.4e-3
        closed = 0.8 * (1 / (1j * w) + (1 - np.exp(-2j * w)) / (w**2 * 2.0))
        self.assertAlmostEqual(abs(k.fourier(np.array([w]))[0, 0, 0] - closed), 0.0, places=8)

    def test_envelope_bounds_kernel(self):
        k = ExponentialKernel([[0.5, 0.0], [0.2, 0.3]], [[1.0, 1.0], [2.0, 0.5]])
        t = np.linspace(0, 5, 51)
        self.assertTrue(np.all(k.envelope(t) >= k.evaluate(t)))

    def test_sum_kernel(self):
        total = ExponentialKernel(0.3, 1.0) + BoxKernel(0.2, 1.0)
        self.assertIsInstance(total, SumKernel)
        self.assertAlmostEqual(total.integral()[0, 0], 0.5)
        self.assertTrue(np.isinf(total.support[0, 0]))

    def test_spectral_radius(self):
        k = ExponentialKernel([[0.5, 0.0], [0.0, 0.3]], 1.0)
        self.assertAlmostEqual(k.spectral_radius(), 0.5)

    def test_rejects_non_positive_decay(self):
        with self.assertRaises(InvalidParameter):
            ExponentialKernel(0.5, 0.0)

    def test_build_from_spec(self):
        kernel = build_kernel({"type": "exponential", "alpha": 0.8, "beta": 1.0, "support": 10})
        self.assertIsInstance(kernel, ExponentialKernel)
        self.assertEqual(kernel.to_dict(), {"type": "exponential", "alpha": 0.8, "beta": 1.0, "support": 10.0})

    def test_build_sum_from_spec(self):
        spec = {
            "type": "sum",
            "parts": [{"type": "box", "height": 1.0, "support": 1.0}, {"type": "zero", "dim": 1}],
        }
        kernel = build_kernel(spec)
        self.assertEqual(build_kernel(kernel.to_dict()).integral()[0, 0], 1.0)

    def test_unknown_kernel_type(self):
        with self.assertRaises(ConfigError):
            build_kernel({"type": "gaussian"})

    def test_bad_kernel_parameters(self):
        with self.assertRaises(ConfigError):
            build_kernel({"type": "box", "height": 1.0})


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


class TestSampleKernel(SimpleTestCase):
    def test_zero_kernel(self):
        grid = sample_kernel(ZeroKernel(2), LagGrid(0.5, 4))
        np.testing.assert_array_equal(grid.values, np.zeros((4, 2, 2)))

    def test_exponential_first_sample(self):
        grid = sample_kernel(ExponentialKernel(0.8, 1.0, support=2.0), LagGrid(0.5, 8))
        self.assertAlmostEqual(grid.values[0, 0, 0], 0.8 * math.exp(-0.25), places=15)
        self.assertEqual(grid.supports[0, 0], 2.0)

    def test_indicator(self):
        grid = sample_kernel(BoxKernel(1.0, 1.0), LagGrid(0.5, 4))
        np.testing.assert_array_equal(grid.values[:, 0, 0], [1, 1, 0, 0])

    def test_linearity(self):
        lag_grid = LagGrid(0.1, 50)
        a = ExponentialKernel([[0.2, 0.1], [0.0, 0.3]], 1.5)
        b = TriangularKernel([[0.1, 0.0], [0.4, 0.2]], 2.0)
        summed = sample_kernel(a + b, lag_grid)
        np.testing.assert_array_equal(
            summed.values, sample_kernel(a, lag_grid).values + sample_kernel(b, lag_grid).values
        )

    def test_unbounded_support_clipped_to_span(self):
        grid = sample_kernel(ExponentialKernel(0.8, 1.0), LagGrid(0.5, 4))
        self.assertEqual(grid.supports[0, 0], 2.0)


class TestKernelGrid(SimpleTestCase):
    def setUp(self):
        self.grid = KernelGrid(LagGrid(0.5, 4), [4.0, 3.0, 2.0, 1.0])

    def test_piecewise_constant_lookup(self):
        vals = self.grid.evaluate(np.array([-0.1, 0.0, 0.49, 0.5, 1.99, 2.0]))[:, 0, 0]
        np.testing.assert_array_equal(vals, [0, 4, 4, 3, 1, 0])

    def test_integral(self):
        self.assertEqual(self.grid.integral()[0, 0], 5.0)

    def test_integral_stops_at_support(self):
        kg = KernelGrid(LagGrid(1.0, 4), np.ones(4), supports=2.5)
        self.assertAlmostEqual(kg.integral()[0, 0], 2.5)
        t = (np.arange(40000) + 0.5) * 1e-4
        self.assertAlmostEqual(kg.evaluate(t)[:, 0, 0].sum() * 1e-4, kg.integral()[0, 0], places=9)
        self.assertAlmostEqual(kg.fourier(np.array([0.0]))[0, 0, 0].real, 2.5)

    def test_integral_per_entry_support(self):
        kg = KernelGrid(LagGrid(0.5, 4), np.ones((4, 2, 2)), supports=[[2.0, 0.75], [0.0, 1.2]])
        np.testing.assert_allclose(kg.integral(), [[2.0, 0.75], [0.0, 1.2]])

    def test_envelope_is_tail_maximum(self):
        kg = KernelGrid(LagGrid(1.0, 4), [1.0, 3.0, 0.5, 2.0])
        np.testing.assert_array_equal(kg.envelope(np.arange(5.0))[:, 0, 0], [3, 3, 2, 2, 0])

    def test_rejects_support_beyond_span(self):
        with self.assertRaises(InvalidParameter):
            KernelGrid(LagGrid(0.5, 4), np.zeros(4), supports=3.0)

    def test_rejects_non_finite_values(self):
        with self.assertRaises(InvalidParameter):
            KernelGrid(LagGrid(0.5, 2), [1.0, np.nan])


class TestCovarianceGrid(SimpleTestCase):
    def test_rejects_non_positive_rate(self):
        with self.assertRaises(NonPositiveRate):
            CovarianceGrid(LagGrid(0.1, 3), [1.0, 0.0], np.zeros((3, 2, 2)))

    def test_autocovariance_blocks(self):
        density = np.arange(12.0).reshape(3, 2, 2)
        cov = CovarianceGrid(LagGrid(0.1, 3), [1.0, 2.0], density)
        gamma = cov.autocovariance(3)
        c0 = density[0]
        np.testing.assert_allclose(gamma[0], 0.1 * np.diag([1.0, 2.0]) + 0.01 * (c0 + c0.T) / 2)
        np.testing.assert_allclose(gamma[2], 0.01 * density[1].T)

    def test_ridge_only_touches_lag_zero(self):
        cov = CovarianceGrid(LagGrid(0.1, 3), [1.0], np.ones(3))
        plain = cov.autocovariance(3)
        ridged = cov.autocovariance(3, ridge=1e-3)
        self.assertAlmostEqual(ridged[0, 0, 0] - plain[0, 0, 0], 1e-3)
        np.testing.assert_array_equal(ridged[1:], plain[1:])

    def test_truncated(self):
        cov = CovarianceGrid(LagGrid(0.1, 5), [1.0], np.arange(5.0))
        short = cov.truncated(2)
        self.assertEqual(short.grid.length, 2)
        np.testing.assert_array_equal(short.density[:, 0, 0], [0.0, 1.0])


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


class TestFormats(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_stream_csv_round_trip(self):
        stream = validate_stream([0.1, 1.0 / 3.0, 2.5], [1, 0, 1], 3.0, 2)
        path = write_stream_csv(stream, self.tmp / "s.csv")
        self.assertTrue(path.read_text().startswith("time,mark\n"))
        self.assertEqual(read_stream(path), stream)

    def test_empty_stream_round_trip(self):
        stream = validate_stream([], [], 3.0, 2)
        self.assertEqual(read_stream(write_stream_csv(stream, self.tmp / "e.csv")), stream)

    def test_shifted_stream_keeps_start(self):
        stream = validate_stream([0.5], [0], 1.0, 1).shifted(4.0)
        self.assertEqual(read_stream(write_stream_csv(stream, self.tmp / "s.csv")).start, 4.0)

    def test_invalid_csv_surfaces_validation_error(self):
        path = self.tmp / "bad.csv"
        path.write_text("time,mark\n1.0,0\n0.5,0\n")
        (self.tmp / "bad.json").write_text('{"T": 2.0, "d": 1}')
        with self.assertRaises(NonIncreasingTimes):
            read_stream(path)

    def test_missing_sidecar(self):
        path = self.tmp / "lonely.csv"
        path.write_text("time,mark\n")
        with self.assertRaises(PointProcessError) as ctx:
            read_stream(path)
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_covariance_grid_json(self):
        cov = CovarianceGrid(LagGrid(0.25, 3), [1.5, 0.5], np.arange(12.0).reshape(3, 2, 2) / 7)
        path = write_covariance_grid(cov, self.tmp / "cov.json")
        self.assertEqual(read_covariance_grid(path), cov)

    def test_kernel_grid_json(self):
        kg = KernelGrid(LagGrid(0.25, 3), np.arange(12.0).reshape(3, 2, 2) / 3, supports=0.5)
        self.assertEqual(read_kernel(write_kernel(kg, self.tmp / "k.json")), kg)

    def test_canonical_json_is_stable(self):
        self.assertEqual(canonical_json({"b": 0.1, "a": [1, 2]}), canonical_json({"a": [1, 2], "b": 0.1}))


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------


class TestSettings(SimpleTestCase):
    @override_settings()
    def test_output_dir_default_matches_project(self):
        del settings.BLP_OUTPUT_DIR
        with patch.dict(os.environ):
            os.environ.pop("BLP_OUTPUT_DIR", None)
            self.assertEqual(output_dir(), settings.BASE_DIR / "runs")

    @override_settings(BLP_OUTPUT_DIR=Path("/srv/blp"))
    def test_django_setting_wins(self):
        self.assertEqual(output_dir(), Path("/srv/blp"))

    @override_settings()
    def test_environment_fallback_is_coerced(self):
        del settings.BLP_WORKERS
        with patch.dict(os.environ, {"BLP_WORKERS": "3"}):
            self.assertEqual(worker_count(), 3)
        self.assertEqual(get_setting("BLP_UNKNOWN", 7), 7)
