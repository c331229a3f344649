"""Tests for the Wiener-Hopf solvers and their mutual consistency."""
from __future__ import annotations

import numpy as np
from django.test import SimpleTestCase, override_settings

from moments import exponential_hawkes_covariance_oracle, hawkes_covariance_oracle, random_stationary_covariance
from pointprocess import CovarianceGrid, LagGrid
from pointprocess.errors import ConfigError, InvalidParameter, SingularErrorMatrix, SingularSystem
from pointprocess.kernels import TriangularKernel
from solvers import (
    DiscretisedWH,
    all_solvers,
    gamma_cutoff_ratio,
    gamma_sequence,
    get_solver,
    integrate_bellman_krein,
    kernel_diagnostics,
    loewner_gaps,
    solve_direct,
    solve_whittle,
    solver_report,
    wh_residual,
    whittle_recursion,
)
from solvers.direct import block_toeplitz, yule_walker_dense


def sup(a):
    return float(np.abs(a).max())


def poisson_cov(p=8, step=0.1):
    return CovarianceGrid(LagGrid(step, p), [1.0, 2.0], np.zeros((p, 2, 2)))


# ---------------------------------------------------------------------------
# Whittle recursions
# ---------------------------------------------------------------------------


class TestWhittleRecursion(SimpleTestCase):
    def test_ar1_coefficients(self):
        gammas = 0.6 ** np.arange(4)
        sol = whittle_recursion(gammas)
        self.assertAlmostEqual(sol.A[1, 0, 0], -0.6, places=12)
        self.assertAlmostEqual(sol.A[2, 0, 0], 0.0, places=12)
        self.assertAlmostEqual(sol.A[3, 0, 0], 0.0, places=12)

    def test_ar1_partial_correlations(self):
        sol = whittle_recursion(0.6 ** np.arange(6))
        gammas = gamma_sequence(sol)[:, 0, 0]
        self.assertAlmostEqual(gammas[0], 0.6, places=12)
        np.testing.assert_allclose(gammas[1:], 0.0, atol=1e-12)

    def test_ar1_error_variance(self):
        sol = whittle_recursion(0.6 ** np.arange(4))
        np.testing.assert_allclose(sol.V[1:, 0, 0], 1 - 0.36, rtol=1e-12)

    def test_white_noise(self):
        gammas = np.zeros((5, 2, 2))
        gammas[0] = np.eye(2)
        sol = whittle_recursion(gammas)
        np.testing.assert_array_equal(sol.A[1:], 0.0)
        for v in sol.V:
            np.testing.assert_array_equal(v, np.eye(2))
        np.testing.assert_array_equal(gamma_sequence(sol), 0.0)

    def test_matches_dense_yule_walker(self):
        cov = random_stationary_covariance(LagGrid(0.1, 6), 2, seed=11)
        gammas = cov.autocovariance(6)
        sol = whittle_recursion(gammas)
        np.testing.assert_allclose(-sol.A[1:], yule_walker_dense(gammas), atol=1e-8)

    def test_forward_and_backward_normal_equations(self):
        cov = random_stationary_covariance(LagGrid(0.1, 6), 2, seed=12)
        gammas = cov.autocovariance(6)
        sol = whittle_recursion(gammas)

        def lag(h):
            return gammas[h] if h >= 0 else gammas[-h].T

        for j in range(1, 7):
            forward = sum(sol.A[k] @ lag(j - k) for k in range(7))
            backward = sum(sol.A_star[k] @ lag(k - j) for k in range(7))
            self.assertLess(sup(forward), 1e-8)
            self.assertLess(sup(backward), 1e-8)

    def test_error_covariance_symmetric_and_decreasing(self):
        cov = random_stationary_covariance(LagGrid(0.1, 32), 2, seed=13)
        sol = solve_whittle(DiscretisedWH(cov))
        np.testing.assert_allclose(sol.V, np.swapaxes(sol.V, 1, 2), atol=1e-12)
        self.assertGreaterEqual(loewner_gaps(sol.V).min(), -1e-10)
        self.assertGreater(np.linalg.eigvalsh(sol.V[-1]).min(), 0)

    def test_singular_error_matrix_reports_order(self):
        with self.assertRaises(SingularErrorMatrix) as ctx:
            whittle_recursion(np.ones((3, 2, 2)))
        self.assertEqual(ctx.exception.details["order"], 1)

    def test_rejects_bad_shape(self):
        with self.assertRaises(InvalidParameter):
            whittle_recursion(np.ones(1))


# ---------------------------------------------------------------------------
# Direct solve
# ---------------------------------------------------------------------------


class TestSolveDirect(SimpleTestCase):
    def test_poisson_gives_zero_kernel(self):
        kernel = solve_direct(DiscretisedWH(poisson_cov()))
        np.testing.assert_array_equal(kernel.values, 0.0)

    def test_single_lag_by_hand(self):
        """p = d = 1: k = c / (rate + c * step)."""
        cov = CovarianceGrid(LagGrid(0.5, 1), [2.0], [0.3])
        kernel = solve_direct(DiscretisedWH(cov))
        self.assertAlmostEqual(kernel.values[0, 0, 0], 0.3 / (2.0 + 0.5 * 0.3), places=14)

    def test_block_layout(self):
        gammas = np.arange(3 * 4, dtype=float).reshape(3, 2, 2)
        big = block_toeplitz(gammas)
        np.testing.assert_array_equal(big[0:2, 2:4], gammas[1])
        np.testing.assert_array_equal(big[2:4, 0:2], gammas[1].T)
        np.testing.assert_array_equal(big[2:4, 2:4], gammas[0])

    def test_levinson_matches_dense(self):
        cov = random_stationary_covariance(LagGrid(0.05, 48), 2, seed=21)
        problem = DiscretisedWH(cov)
        dense = solve_direct(problem, method="dense")
        fast = solve_direct(problem, method="levinson")
        self.assertLess(sup(dense.values - fast.values), 1e-9 * max(1.0, sup(dense.values)))

    def test_residual_is_small(self):
        cov = random_stationary_covariance(LagGrid(0.05, 32), 2, seed=22)
        problem = DiscretisedWH(cov)
        self.assertLess(wh_residual(problem, solve_direct(problem)), 1e-8)

    def test_singular_system(self):
        with self.assertRaises(SingularSystem) as ctx:
            yule_walker_dense(np.ones((3, 2, 2)))
        self.assertIn("condition", ctx.exception.details)

    def test_unknown_method(self):
        with self.assertRaises(InvalidParameter):
            solve_direct(DiscretisedWH(poisson_cov()), method="qr")

    def test_hawkes_kernel_recovered(self):
        """Exact exponential Hawkes covariance returns alpha e^{-beta t} within 5% on (0, 5]."""
        grid = LagGrid(0.02, 400)
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, grid)
        problem = DiscretisedWH(cov)
        window = grid.lags <= 5.0
        target = 0.8 * np.exp(-grid.lags[window])
        for solver in all_solvers():
            with self.subTest(solver=solver.key):
                kernel = solver.solve(problem)
                self.assertLess(sup(kernel.values[window, 0, 0] - target), 0.05 * 0.8)


# ---------------------------------------------------------------------------
# Bellman-Krein march
# ---------------------------------------------------------------------------


class TestBellmanKrein(SimpleTestCase):
    def test_poisson_is_zero(self):
        sol = integrate_bellman_krein(DiscretisedWH(poisson_cov()))
        np.testing.assert_array_equal(sol.gamma, 0.0)
        np.testing.assert_array_equal(sol.F, 0.0)

    def test_first_step_uses_covariance_alone(self):
        cov = random_stationary_covariance(LagGrid(0.1, 8), 2, seed=31)
        sol = integrate_bellman_krein(DiscretisedWH(cov))
        np.testing.assert_allclose(sol.partial_cov[0], cov.density[0].T, rtol=1e-13)
        expected = cov.density[0].T @ np.linalg.inv(sol.W_star[0])
        np.testing.assert_allclose(sol.gamma[0], expected, rtol=1e-10)

    def test_boundary_on_every_diagonal(self):
        cov = random_stationary_covariance(LagGrid(0.1, 12), 2, seed=32)
        sol = integrate_bellman_krein(DiscretisedWH(cov))
        for n in range(12):
            np.testing.assert_array_equal(sol.F[n, n], sol.gamma[n])
            np.testing.assert_array_equal(sol.F_star[n, n], sol.gamma_star[n])
            np.testing.assert_array_equal(sol.F[n, n + 1 :], 0.0)
        np.testing.assert_array_equal(sol.F[-1], sol.kernel_values)

    def test_without_path(self):
        cov = random_stationary_covariance(LagGrid(0.1, 12), 2, seed=33)
        problem = DiscretisedWH(cov)
        lean = integrate_bellman_krein(problem, keep_path=False)
        full = integrate_bellman_krein(problem)
        self.assertIsNone(lean.F)
        np.testing.assert_array_equal(lean.kernel_values, full.kernel_values)


# ---------------------------------------------------------------------------
# Three-way agreement
# ---------------------------------------------------------------------------


class TestAgreement(SimpleTestCase):
    def test_random_covariances(self):
        """BK equals Whittle to 1e-10 relative, and both match the dense solve to 1e-6."""
        for seed in range(20):
            with self.subTest(seed=seed):
                cov = random_stationary_covariance(LagGrid(0.05, 64), 2, seed=100 + seed)
                problem = DiscretisedWH(cov)
                whittle = solve_whittle(problem).kernel().values
                bk = integrate_bellman_krein(problem, keep_path=False).kernel_values
                dense = solve_direct(problem).values
                scale = max(sup(whittle), 1e-300)
                self.assertLessEqual(sup(bk - whittle), 1e-10 * scale)
                self.assertLessEqual(sup(dense - whittle), 1e-6)

    def test_whittle_and_bk_error_paths(self):
        cov = random_stationary_covariance(LagGrid(0.05, 24), 2, seed=41)
        problem = DiscretisedWH(cov)
        w = solve_whittle(problem)
        bk = integrate_bellman_krein(problem)
        np.testing.assert_allclose(bk.W, w.V, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(bk.gamma, w.gamma, rtol=1e-9, atol=1e-12)

    def test_registry_solvers_agree(self):
        cov = random_stationary_covariance(LagGrid(0.05, 16), 2, seed=42)
        problem = DiscretisedWH(cov)
        kernels = {s.key: s.solve(problem).values for s in all_solvers()}
        self.assertEqual(set(kernels), {"direct", "whittle", "bellman_krein"})
        for values in kernels.values():
            self.assertLess(sup(values - kernels["direct"]), 1e-6)

    def test_unknown_solver(self):
        with self.assertRaises(ConfigError):
            get_solver("spectral")


# ---------------------------------------------------------------------------
# Problem set-up and diagnostics
# ---------------------------------------------------------------------------


class TestDiscretisedWH(SimpleTestCase):
    def test_default_order_is_grid_length(self):
        self.assertEqual(DiscretisedWH(poisson_cov(p=8)).order, 8)

    def test_order_bounds(self):
        with self.assertRaises(InvalidParameter):
            DiscretisedWH(poisson_cov(p=8), order=9)
        with self.assertRaises(InvalidParameter):
            DiscretisedWH(poisson_cov(p=8), order=0)

    def test_no_ridge_by_default(self):
        problem = DiscretisedWH(poisson_cov())
        self.assertEqual(problem.ridge_size, 0.0)

    @override_settings(BLP_RIDGE_SCALE=1e-4)
    def test_ridge_added_to_lag_zero(self):
        cov = poisson_cov(step=0.5)
        plain = DiscretisedWH(cov).autocovariance()
        ridged = DiscretisedWH(cov, ridge=True).autocovariance()
        # tr(Gamma_0) / d = 0.5 * (1 + 2) / 2
        np.testing.assert_allclose(ridged[0] - plain[0], 1e-4 * 0.75 * np.eye(2))
        np.testing.assert_array_equal(ridged[1:], plain[1:])


class TestDiagnostics(SimpleTestCase):
    def test_gamma_cut_off_beyond_support(self):
        """Compact Hawkes kernel: partial correlations past the support fall below 1% of the peak."""
        grid = LagGrid(0.02, 150)
        cov = hawkes_covariance_oracle(0.5, TriangularKernel(0.8, 2.0), grid)
        sol = solve_whittle(DiscretisedWH(cov))
        self.assertLess(gamma_cutoff_ratio(gamma_sequence(sol), grid.step, 2.0), 0.01)

    def test_cutoff_ratio_of_white_noise(self):
        self.assertEqual(gamma_cutoff_ratio(np.zeros((4, 1, 1)), 1.0, 1.0), 0.0)

    def test_kernel_diagnostics(self):
        cov = exponential_hawkes_covariance_oracle(0.5, 0.8, 1.0, LagGrid(0.05, 200))
        report = kernel_diagnostics(solve_direct(DiscretisedWH(cov)))
        self.assertAlmostEqual(report["spectral_radius"], report["integrals"][0][0])
        self.assertLess(abs(report["spectral_radius"] - 0.8), 0.05)

    def test_solver_report(self):
        cov = random_stationary_covariance(LagGrid(0.1, 8), 2, seed=51)
        problem = DiscretisedWH(cov)
        w = solve_whittle(problem)
        report = solver_report(problem, w.kernel(), whittle=w)
        self.assertEqual(report["order"], 8)
        self.assertEqual(len(report["gamma_norms"]), 8)
        self.assertEqual(len(report["v_eigenvalues"]), 9)
        self.assertLess(report["residual"], 1e-8)
