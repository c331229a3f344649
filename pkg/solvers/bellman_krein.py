"""
First-order Euler march of the Bellman-Krein equations.

With M_j = C((j - 1/2) step)^T the kernel F(n, .) of the order-n predictor
and its backward counterpart F* are raised one step at a time:

    Q      = M_{n+1} - step * sum_k F(n, k) M_{n+1-k}
    Q*     = M_{n+1}^T - step * sum_k F*(n, k) M_{n+1-k}^T
    Gamma  = Q W*^-1,  Gamma* = Q* W^-1
    F(n+1, k)  = F(n, k) - step * Gamma F*(n, n+1-k),  F(n+1, n+1) = Gamma
    F*(n+1, k) = F*(n, k) - step * Gamma* F(n, n+1-k), F*(n+1, n+1) = Gamma*
    W  <- W - step^2 Gamma Q*,  W* <- W* - step^2 Gamma* Q

starting from W = W* = D + step * (C_0 + C_0^T) / 2. The integrals are
left-endpoint sums, so the march reproduces the Whittle recursions.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from pointprocess import KernelGrid, LagGrid
from pointprocess.errors import NumericOverflow

from .problem import DiscretisedWH

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BKSolution:
    """
    F, F_star: (p, p, d, d) lower-triangular, entry [n - 1, k - 1] is F(n, k);
        None when the march ran without keeping the path.
    kernel_values: (p, d, d), the final row F(p, 1..p).
    gamma, gamma_star: (p, d, d) boundary values F(n, n), F*(n, n).
    partial_cov: (p, d, d) the Q term at each step.
    W, W_star: (p + 1, d, d) error covariances per unit time.
    """

    kernel_values: np.ndarray
    gamma: np.ndarray
    gamma_star: np.ndarray
    partial_cov: np.ndarray
    W: np.ndarray
    W_star: np.ndarray
    step: float
    F: np.ndarray | None = None
    F_star: np.ndarray | None = None

    @property
    def order(self) -> int:
        return int(self.gamma.shape[0])

    def kernel(self) -> KernelGrid:
        return KernelGrid(LagGrid(self.step, self.order), self.kernel_values)


def _right_divide(numerator: np.ndarray, matrix: np.ndarray, step: int) -> np.ndarray:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            return scipy.linalg.solve(matrix.T, numerator.T).T
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError) as e:
        raise NumericOverflow("singular error covariance during the march", step=step) from e


def integrate_bellman_krein(problem: DiscretisedWH, keep_path: bool = True) -> BKSolution:
    """
    March the forward and backward equations from order 0 to the problem order.

    Raises:
        NumericOverflow: a non-finite value or singular error covariance
    """
    step = problem.step
    gammas = problem.autocovariance()
    p, d = problem.order, problem.dim
    M = np.empty((p + 1, d, d))
    M[1:] = gammas[1:] / step**2
    M[0] = np.nan  # never read

    F = np.zeros((p, d, d))
    Fs = np.zeros((p, d, d))
    path = np.zeros((p, p, d, d)) if keep_path else None
    path_star = np.zeros((p, p, d, d)) if keep_path else None
    W = np.empty((p + 1, d, d))
    Ws = np.empty((p + 1, d, d))
    W[0] = Ws[0] = gammas[0] / step
    gamma = np.empty((p, d, d))
    gamma_star = np.empty((p, d, d))
    partial = np.empty((p, d, d))

    for n in range(p):
        lags = M[n : 0 : -1]  # M_{n+1-k}, k = 1..n
        q = M[n + 1] - step * np.einsum("kij,kjl->il", F[:n], lags)
        qs = M[n + 1].T - step * np.einsum("kij,klj->il", Fs[:n], lags)
        g = _right_divide(q, Ws[n], n + 1)
        gs = _right_divide(qs, W[n], n + 1)

        prev_F = F[:n].copy()
        F[:n] -= step * np.einsum("ij,kjl->kil", g, Fs[n - 1 :: -1] if n else Fs[:0])
        Fs[:n] -= step * np.einsum("ij,kjl->kil", gs, prev_F[::-1])
        F[n] = g
        Fs[n] = gs

        W[n + 1] = W[n] - step**2 * g @ qs
        Ws[n + 1] = Ws[n] - step**2 * gs @ q
        if not (np.all(np.isfinite(F[: n + 1])) and np.all(np.isfinite(W[n + 1]))):
            raise NumericOverflow("non-finite value in the Bellman-Krein march", step=n + 1)

        gamma[n] = g
        gamma_star[n] = gs
        partial[n] = q
        if keep_path:
            path[n, : n + 1] = F[: n + 1]
            path_star[n, : n + 1] = Fs[: n + 1]

    logger.debug("bellman-krein: %d steps of %g, d=%d", p, step, d)
    return BKSolution(
        kernel_values=F,
        gamma=gamma,
        gamma_star=gamma_star,
        partial_cov=partial,
        W=W,
        W_star=Ws,
        step=step,
        F=path,
        F_star=path_star,
    )
