"""Consistency checks and summaries for solver output."""
from __future__ import annotations

from typing import Any

import numpy as np

from pointprocess import KernelGrid
from pointprocess.errors import InvalidParameter

from .bellman_krein import BKSolution
from .problem import DiscretisedWH
from .whittle import WhittleSolution


def gamma_sequence(solution: WhittleSolution | BKSolution) -> np.ndarray:
    """Partial correlations Gamma_1..Gamma_p as a (p, d, d) array, per unit time."""
    return np.array(solution.gamma, dtype=float)


def gamma_norms(gammas: np.ndarray) -> np.ndarray:
    """Matrix infinity norm of each Gamma_n."""
    return np.abs(gammas).sum(axis=2).max(axis=1)


def gamma_cutoff_ratio(gammas: np.ndarray, step: float, support: float) -> float:
    """
    Largest norm of Gamma at lags beyond ``support`` relative to the peak norm.

    Gamma_n sits at lag (n - 1/2) * step.
    """
    norms = gamma_norms(gammas)
    peak = norms.max()
    if peak == 0:
        return 0.0
    lags = (np.arange(norms.size) + 0.5) * step
    beyond = norms[lags > support]
    return float(beyond.max() / peak) if beyond.size else 0.0


def loewner_gaps(V: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of V_{n-1} - V_n for n = 1..p; nonnegative when V decreases."""
    diffs = V[:-1] - V[1:]
    sym = 0.5 * (diffs + np.swapaxes(diffs, 1, 2))
    return np.linalg.eigvalsh(sym)[:, 0]


def wh_residual(problem: DiscretisedWH, kernel: KernelGrid) -> float:
    """
    Max absolute residual of sum_k step K_k Gamma_{j-k} = Gamma_j over j = 1..p,
    in density units.
    """
    gammas = problem.autocovariance()
    step, p = problem.step, problem.order
    if kernel.grid.length < p:
        raise InvalidParameter("kernel grid shorter than the problem order", p=p)
    phi = step * np.asarray(kernel.values)[:p]
    worst = 0.0
    for j in range(1, p + 1):
        # Gamma_{j-k} for k = 1..p, negative lags transposed
        offsets = j - np.arange(1, p + 1)
        blocks = np.where(
            (offsets >= 0)[:, None, None],
            gammas[np.abs(offsets)],
            np.swapaxes(gammas[np.abs(offsets)], 1, 2),
        )
        lhs = np.einsum("kij,kjl->il", phi, blocks)
        worst = max(worst, float(np.abs(lhs - gammas[j]).max()))
    return worst / step**2


def kernel_diagnostics(kernel: KernelGrid) -> dict[str, Any]:
    """Entrywise minimum, spectral radius of int K and the per-entry integrals."""
    integral = kernel.integral()
    return {
        "min": float(np.min(kernel.values)),
        "spectral_radius": float(np.max(np.abs(np.linalg.eigvals(integral)))),
        "integrals": integral.tolist(),
    }


def solver_report(
    problem: DiscretisedWH,
    kernel: KernelGrid,
    whittle: WhittleSolution | None = None,
    bk: BKSolution | None = None,
) -> dict[str, Any]:
    """Diagnostics document written next to a solved kernel."""
    gamma0 = problem.autocovariance()[0]
    report: dict[str, Any] = {
        "order": problem.order,
        "delta": problem.step,
        "d": problem.dim,
        "ridge": problem.ridge_size,
        "residual": wh_residual(problem, kernel),
        "gamma0_condition": float(np.linalg.cond(gamma0)),
        "kernel": kernel_diagnostics(kernel),
    }
    if whittle is not None:
        report["gamma_norms"] = gamma_norms(gamma_sequence(whittle)).tolist()
        report["v_eigenvalues"] = np.linalg.eigvalsh(
            0.5 * (whittle.V + np.swapaxes(whittle.V, 1, 2))
        ).tolist()
        report["min_loewner_gap"] = float(loewner_gaps(whittle.V).min())
    if bk is not None:
        report["bk_gamma_norms"] = gamma_norms(gamma_sequence(bk)).tolist()
    return report
