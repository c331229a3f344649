"""Tests for the innovations algorithm and shot-kernel recovery."""
from __future__ import annotations

import numpy as np
from django.test import SimpleTestCase

from innovations import (
    InnovationsSolution,
    innovations_recursion,
    leakage_ratio,
    recover_shot_kernel,
    solve_innovations,
)
from moments import exponential_hawkes_covariance_oracle, neyman_scott_covariance_oracle, random_stationary_covariance
from pointprocess import CovarianceGrid, KernelGrid, LagGrid
from pointprocess.errors import InvalidParameter, SingularV
from pointprocess.kernels import BoxKernel
from simulators.neyman_scott import NeymanScottParams
from solvers import DiscretisedWH, loewner_gaps, solve_whittle


def ma1_sequence(theta=0.5, n=50):
    gammas = np.zeros(n + 1)
    gammas[0] = 1 + theta**2
    gammas[1] = theta
    return gammas


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------


class TestInnovationsRecursion(SimpleTestCase):
    def test_poisson_has_no_innovation_weights(self):
        cov = CovarianceGrid(LagGrid(0.1, 10), [1.0, 3.0], np.zeros((10, 2, 2)))
        sol = solve_innovations(cov)
        np.testing.assert_array_equal(sol.theta, 0.0)
        for v in sol.V:
            np.testing.assert_allclose(v, np.diag([1.0, 3.0]), rtol=1e-15)

    def test_boundary_identity_on_every_row(self):
        """Theta(t, t) V(0) reproduces the covariance at lag t."""
        cov = random_stationary_covariance(LagGrid(0.1, 24), 2, seed=3)
        sol = solve_innovations(cov)
        for t in range(1, 25):
            lhs = sol.theta[t, t] @ sol.V[0]
            np.testing.assert_allclose(lhs, cov.density[t - 1].T, rtol=1e-12, atol=1e-12)

    def test_ma1_converges(self):
        sol = innovations_recursion(ma1_sequence())
        self.assertLess(abs(sol.theta[50, 1, 0, 0] - 0.5), 1e-6)
        self.assertLess(abs(sol.V[50, 0, 0] - 1.0), 1e-6)
        np.testing.assert_allclose(sol.row(50)[1:], 0.0, atol=1e-12)

    def test_ma1_rows_are_cauchy(self):
        sol = innovations_recursion(ma1_sequence())
        self.assertLess(abs(sol.theta[50, 1, 0, 0] - sol.theta[25, 1, 0, 0]), 1e-6)

    def test_ma1_first_rows_by_hand(self):
        sol = innovations_recursion(ma1_sequence())
        self.assertAlmostEqual(sol.theta[1, 1, 0, 0], 0.5 / 1.25, places=14)
        self.assertAlmostEqual(sol.V[1, 0, 0], 1.25 - 0.25 / 1.25, places=14)

    def test_error_covariance_symmetric_and_decreasing(self):
        cov = random_stationary_covariance(LagGrid(0.05, 40), 2, seed=4)
        sol = solve_innovations(cov)
        np.testing.assert_array_equal(sol.V, np.swapaxes(sol.V, 1, 2))
        self.assertGreaterEqual(loewner_gaps(sol.V).min(), -1e-10)

    def test_one_step_error_matches_whittle(self):
        cov = random_stationary_covariance(LagGrid(0.05, 40), 2, seed=5)
        inn = solve_innovations(cov, 30)
        whittle = solve_whittle(DiscretisedWH(cov, order=30))
        np.testing.assert_allclose(inn.V[30], whittle.V[30], atol=1e-6)

    def test_singular_v_reports_index(self):
        with self.assertRaises(SingularV) as ctx:
            innovations_recursion(np.ones((3, 2, 2)))
        self.assertEqual(ctx.exception.details["index"], 0)

    def test_length_bounds(self):
        cov = random_stationary_covariance(LagGrid(0.1, 8), 1, seed=6)
        with self.assertRaises(InvalidParameter):
            solve_innovations(cov, 9)

    def test_document_keeps_indices(self):
        cov = random_stationary_covariance(LagGrid(0.1, 5), 2, seed=7)
        sol = solve_innovations(cov)
        data = sol.to_dict()
        self.assertEqual(len(data["theta"]), 15)
        self.assertEqual((data["theta"][0]["t"], data["theta"][0]["h"]), (1, 1))
        again = InnovationsSolution.from_dict(data)
        np.testing.assert_array_equal(again.theta, sol.theta)
        np.testing.assert_array_equal(again.V, sol.V)

    def test_malformed_document(self):
        with self.assertRaises(InvalidParameter):
            InnovationsSolution.from_dict({"n": 2})


# ---------------------------------------------------------------------------
# Shot kernels
# ---------------------------------------------------------------------------


class TestRecoverShotKernel(SimpleTestCase):
    def test_no_clusters_gives_zero_kernel(self):
        cov = CovarianceGrid(LagGrid(0.1, 20), [0.5], np.zeros(20))
        est = recover_shot_kernel(cov, support=1.0)
        np.testing.assert_array_equal(est.kernel.values, 0.0)
        self.assertFalse(est.flagged)

    def test_box_shot_kernel_stays_in_support(self):
        """nu = 0.5, Theta = 1.5 on [0, 2): the moving-average factor has mass 1 and no tail."""
        params = NeymanScottParams([0.5], BoxKernel(1.5, 2.0))
        cov = neyman_scott_covariance_oracle(params, LagGrid(0.05, 200))
        est = recover_shot_kernel(cov, support=2.0)
        self.assertFalse(est.flagged)
        self.assertLess(est.leakage, 0.01)
        self.assertLess(abs(est.kernel.integral()[0, 0] - 1.0), 0.05)

    def test_hawkes_covariance_is_flagged(self):
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, LagGrid(0.05, 200))
        with self.assertLogs("innovations.shot_noise", level="WARNING"):
            est = recover_shot_kernel(cov, support=2.0)
        self.assertTrue(est.flagged)

    def test_leakage_ratio(self):
        kernel = KernelGrid(LagGrid(1.0, 4), [2.0, 1.0, 0.1, 0.0])
        self.assertAlmostEqual(leakage_ratio(kernel, 2.0), 0.05)
        self.assertEqual(leakage_ratio(kernel, 10.0), 0.0)
