"""Tests for predictor assembly, evaluation and scoring."""
from __future__ import annotations

import csv
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from innovations import InnovationsSolution, solve_innovations
from moments import exponential_hawkes_covariance_oracle
from pointprocess import CovarianceGrid, LagGrid, validate_stream
from pointprocess.errors import GridOutOfRange, NonPositiveRate
from pointprocess.kernels import ExponentialKernel, ZeroKernel
from prediction import (
    Predictor,
    assemble_predictor,
    evaluate_predictor,
    predict_intensity,
    write_trace_csv,
)
from prediction.evaluation import bin_edges
from simulators.hawkes import HawkesParams, simulate_hawkes_path
from simulators.poisson import simulate_poisson
from solvers import DiscretisedWH, solve_direct

HAWKES = HawkesParams([0.5], ExponentialKernel(0.8, 1.0))


def hawkes_paths(n, horizon, seed):
    return [simulate_hawkes_path(HAWKES, horizon, seed=seed + r) for r in range(n)]


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


class TestAssemblePredictor(SimpleTestCase):
    def test_zero_kernel_is_constant(self):
        pred = assemble_predictor(ZeroKernel(2), [1.0, 2.0])
        np.testing.assert_array_equal(pred.intercept, [1.0, 2.0])
        empty = validate_stream([], [], 10.0, 2)
        out = predict_intensity(pred, empty, [0.0, 5.0, 10.0])
        np.testing.assert_array_equal(out, [[1.0, 2.0]] * 3)

    def test_unbiased_intercept(self):
        pred = assemble_predictor(ExponentialKernel(0.8, 1.0), [2.5])
        self.assertAlmostEqual(pred.intercept[0], 0.5)
        self.assertEqual(pred.form, "AR")

    def test_cross_excitation_intercept(self):
        """Column j of int K is weighted by the rate of mark j."""
        kernel = ExponentialKernel([[0.0, 0.5], [0.0, 0.0]], 1.0)
        pred = assemble_predictor(kernel, [1.0, 2.0])
        np.testing.assert_allclose(pred.intercept, [0.0, 2.0])

    def test_accepts_kernel_spec(self):
        pred = assemble_predictor({"type": "exponential", "alpha": 0.8, "beta": 1.0}, [2.5])
        self.assertAlmostEqual(pred.intercept[0], 0.5)

    def test_non_positive_rate(self):
        with self.assertRaises(NonPositiveRate):
            assemble_predictor(ZeroKernel(1), [0.0])

    def test_recovered_kernel_intercept(self):
        """Solving on the exact Hawkes covariance gives back the baseline within 5%."""
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, LagGrid(0.02, 400))
        kernel = solve_direct(DiscretisedWH(cov))
        pred = assemble_predictor(kernel, cov.mean_rates)
        self.assertLess(abs(pred.intercept[0] - 0.5), 0.025)


# ---------------------------------------------------------------------------
# AR-form evaluation
# ---------------------------------------------------------------------------


class TestPredictIntensity(SimpleTestCase):
    def test_single_event(self):
        pred = assemble_predictor(ExponentialKernel(0.8, 1.0), [2.5])
        stream = validate_stream([1.0], [0], 5.0, 1)
        times = np.array([1.0, 1.5, 3.0])
        out = predict_intensity(pred, stream, times)[:, 0]
        expected = [0.5, 0.5 + 0.8 * np.exp(-0.5), 0.5 + 0.8 * np.exp(-2.0)]
        np.testing.assert_allclose(out, expected, rtol=1e-14)

    def test_times_outside_window(self):
        pred = assemble_predictor(ZeroKernel(1), [1.0])
        stream = validate_stream([1.0], [0], 5.0, 1)
        with self.assertRaises(GridOutOfRange):
            predict_intensity(pred, stream, [5.5])
        with self.assertRaises(GridOutOfRange):
            predict_intensity(pred, stream, [-0.1])

    def test_times_outside_restricted_window(self):
        stream = simulate_poisson([2.0], 1000.0, seed=1).restrict(500.0, 1000.0)
        pred = assemble_predictor(ZeroKernel(1), [2.0])
        predict_intensity(pred, stream, [500.0, 1000.0])
        with self.assertRaises(GridOutOfRange):
            predict_intensity(pred, stream, [1400.0])
        with self.assertRaises(GridOutOfRange):
            predict_intensity(pred, stream, [499.0])

    def test_require_history(self):
        pred = assemble_predictor(ExponentialKernel(0.5, 1.0, support=2.0), [1.0])
        stream = validate_stream([1.0], [0], 5.0, 1)
        with self.assertRaises(GridOutOfRange):
            predict_intensity(pred, stream, [1.5], require_history=True)
        predict_intensity(pred, stream, [2.5], require_history=True)

    def test_future_events_do_not_matter(self):
        """Dropping or adding events at or after t leaves the prediction at t unchanged."""
        pred = assemble_predictor(HAWKES.kernel, [2.5])
        stream = simulate_hawkes_path(HAWKES, 100.0, seed=3).stream
        t = 50.0
        before = predict_intensity(pred, stream, [t])
        past = stream.times < t
        cut = validate_stream(stream.times[past], stream.marks[past], 100.0, 1)
        extra = validate_stream(
            np.append(stream.times[past], [t, 60.0]), np.append(stream.marks[past], [0, 0]), 100.0, 1
        )
        np.testing.assert_array_equal(predict_intensity(pred, cut, [t]), before)
        np.testing.assert_array_equal(predict_intensity(pred, extra, [t]), before)

    def test_true_kernel_reproduces_simulated_intensity(self):
        path = simulate_hawkes_path(HAWKES, 200.0, seed=12)
        pred = assemble_predictor(HAWKES.kernel, HAWKES.stationary_rates())
        times = np.linspace(40.0, 200.0, 801)
        np.testing.assert_allclose(
            predict_intensity(pred, path.stream, times), path.intensity(times), atol=1e-9, rtol=0
        )


# ---------------------------------------------------------------------------
# MA-form evaluation
# ---------------------------------------------------------------------------


class TestMovingAveragePredictor(SimpleTestCase):
    def make_solution(self):
        theta = np.zeros((3, 3, 1, 1))
        theta[1, 1] = 0.5
        theta[2, 1] = 0.4
        theta[2, 2] = 0.1
        return InnovationsSolution(theta=theta, V=np.ones((3, 1, 1)), step=1.0)

    def test_residual_feedback_by_hand(self):
        pred = Predictor.from_innovations(self.make_solution(), [1.0])
        self.assertEqual(pred.form, "MA")
        # bin counts 2, 0, 1, 0
        stream = validate_stream([0.5, 0.7, 2.2], [0, 0, 0], 10.0, 1)
        out = predict_intensity(pred, stream, [0.2, 1.0, 2.9, 3.5])[:, 0]
        np.testing.assert_allclose(out, [1.0, 1.5, 0.5, 1.05], rtol=1e-14)

    def test_poisson_covariance_gives_constant(self):
        cov = CovarianceGrid(LagGrid(0.1, 20), [2.0], np.zeros(20))
        pred = Predictor.from_innovations(solve_innovations(cov), [2.0])
        stream = simulate_poisson([2.0], 50.0, seed=4)
        out = predict_intensity(pred, stream, np.linspace(0.0, 49.0, 50))
        np.testing.assert_allclose(out, 2.0, rtol=1e-12)

    def test_ignores_bin_of_evaluation_time(self):
        pred = Predictor.from_innovations(self.make_solution(), [1.0])
        a = validate_stream([0.5], [0], 10.0, 1)
        b = validate_stream([0.5, 1.2], [0, 0], 10.0, 1)
        np.testing.assert_array_equal(predict_intensity(pred, a, [1.5]), predict_intensity(pred, b, [1.5]))


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


class TestEvaluatePredictor(SimpleTestCase):
    def test_constant_predictor_on_poisson(self):
        streams = [simulate_poisson([2.0], 200.0, seed=30 + r) for r in range(20)]
        pred = assemble_predictor(ZeroKernel(1), [2.0])
        truth = [lambda t: np.full((len(t), 1), 2.0)] * len(streams)
        report = evaluate_predictor(pred, streams, 0.5, intensities=truth, workers=1)
        self.assertEqual(report.truth_mse[0], 0.0)
        self.assertLess(abs(report.bias[0]), 3 * report.bias_se[0])
        # Poisson(1) bin counts: E (N - 1)^2 = 1
        self.assertLess(abs(report.count_mse[0] - 1.0), 5 * report.count_mse_se[0])
        self.assertAlmostEqual(report.count_mse_per_time[0], report.count_mse[0] / 0.5)

    def test_true_kernel_matches_truth(self):
        paths = hawkes_paths(4, 150.0, seed=40)
        pred = assemble_predictor(HAWKES.kernel, HAWKES.stationary_rates())
        report = evaluate_predictor(
            pred,
            [p.stream for p in paths],
            0.5,
            intensities=[p.intensity for p in paths],
            burn_in=40.0,
            workers=1,
        )
        self.assertLessEqual(report.truth_mse[0], 1e-18)
        self.assertEqual(report.n_bins, 4 * 220)

    def test_restricted_streams_score_their_own_window(self):
        streams = [simulate_poisson([2.0], 1000.0, seed=60 + r).restrict(500.0, 1000.0) for r in range(2)]
        edges = bin_edges(streams[0], 1.0)
        self.assertEqual(edges[0], 500.0)
        self.assertEqual(edges.size, 500)
        report = evaluate_predictor(assemble_predictor(ZeroKernel(1), [2.0]), streams, 1.0, workers=1)
        self.assertEqual(report.n_bins, 2 * 500)
        self.assertLess(abs(report.bias[0]), 0.3)

    def test_report_document(self):
        streams = [simulate_poisson([1.0, 1.0], 20.0, seed=50 + r) for r in range(3)]
        report = evaluate_predictor(assemble_predictor(ZeroKernel(2), [1.0, 1.0]), streams, 1.0, workers=1)
        data = report.to_dict()
        self.assertNotIn("truth_mse", data)
        self.assertEqual(len(data["count_mse_per_time"]), 2)


@tag("slow")
class TestPredictorBattery(SimpleTestCase):
    """500 Hawkes paths of length 2000 shared by the Monte-Carlo checks."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.streams = [p.stream for p in hawkes_paths(500, 2000.0, seed=7000)]
        cls.rates = HAWKES.stationary_rates()

    def test_mse_ordering(self):
        """The true kernel beats the zero kernel and a 1.3x kernel."""
        scores = {
            name: evaluate_predictor(
                assemble_predictor(kernel, self.rates), self.streams, 0.1, burn_in=40.0
            ).count_mse[0]
            for name, kernel in {
                "true": HAWKES.kernel,
                "zero": ZeroKernel(1),
                "scaled": ExponentialKernel(1.04, 1.0),
            }.items()
        }
        self.assertLess(scores["true"], scores["zero"])
        self.assertLess(scores["true"], scores["scaled"])

    def test_unbiased(self):
        pred = assemble_predictor(HAWKES.kernel, self.rates)
        report = evaluate_predictor(pred, self.streams, 0.5, burn_in=40.0)
        self.assertLess(abs(report.mean_prediction[0] - 2.5), 3 * report.mean_prediction_se[0])
        self.assertLess(abs(report.bias[0]), 3 * report.bias_se[0])


class TestWriteTraceCsv(SimpleTestCase):
    def test_long_format(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_trace_csv(
                Path(tmp) / "trace.csv",
                np.array([0.0, 0.5]),
                np.array([[1.0, 2.0], [1.5, 2.5]]),
                truth=np.array([[1.0, 2.0], [1.25, 2.0]]),
            )
            with path.open() as fh:
                rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ["t", "coordinate", "lambda_hat", "lambda_true"])
        self.assertEqual(rows[3], ["0.5", "0", "1.5", "1.25"])
        self.assertEqual(len(rows), 5)

    def test_without_truth(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_trace_csv(Path(tmp) / "t.csv", np.array([1.0]), np.array([[3.0]]))
            rows = path.read_text().splitlines()
        self.assertEqual(rows[1], "1.0,0,3.0,")
