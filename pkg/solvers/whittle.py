"""
Whittle's multivariate Levinson-Durbin recursions.

Given blocks Gamma_h = E[X_{t+h} X_t^T] for h = 0..p, the order-n forward
coefficients A_{n,0} = I, A_{n,1..n} satisfy sum_k A_{n,k} Gamma_{j-k} = 0
for j = 1..n, and the backward coefficients A*_{n,k} satisfy
sum_k A*_{n,k} Gamma_{k-j} = 0. Orders are raised one at a time:

    Delta_n   = sum_k A_{n,k} Gamma_{n+1-k}
    A_{n+1,n+1}  = -Delta_n (V*_n)^-1
    A*_{n+1,n+1} = -Delta_n^T V_n^-1
    A_{n+1,k}  = A_{n,k} + A_{n+1,n+1} A*_{n,n+1-k}
    A*_{n+1,k} = A*_{n,k} + A*_{n+1,n+1} A_{n,n+1-k}
    V_{n+1}  = V_n + A_{n+1,n+1} Delta_n^T
    V*_{n+1} = V*_n + A*_{n+1,n+1} Delta_n
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from pointprocess import KernelGrid, LagGrid
from pointprocess.errors import InvalidParameter, SingularErrorMatrix

from .problem import DiscretisedWH

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WhittleSolution:
    """
    Final-order coefficients and the per-order error paths.

    A, A_star: (p + 1, d, d), index 0 is the identity.
    V, V_star: (p + 1, d, d) prediction error covariances per order, divided
        by step (per unit time).
    gamma: (p, d, d) partial correlations -A_{n,n} / step for n = 1..p.
    """

    A: np.ndarray
    A_star: np.ndarray
    V: np.ndarray
    V_star: np.ndarray
    gamma: np.ndarray
    gamma_star: np.ndarray
    step: float

    @property
    def order(self) -> int:
        return int(self.A.shape[0] - 1)

    @property
    def dim(self) -> int:
        return int(self.A.shape[1])

    def kernel(self) -> KernelGrid:
        """K at lag (k - 1/2) * step is -A_{p,k} / step."""
        return KernelGrid(LagGrid(self.step, self.order), -self.A[1:] / self.step)


def _right_divide(numerator: np.ndarray, matrix: np.ndarray, order: int) -> np.ndarray:
    """numerator @ inv(matrix), failing loudly on a singular error matrix."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            return scipy.linalg.solve(matrix.T, numerator.T).T
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        raise SingularErrorMatrix(
            f"error covariance not invertible at order {order}",
            order=order,
            eigenvalues=np.linalg.eigvals(matrix).real,
        ) from e


def whittle_recursion(autocov: np.ndarray, step: float = 1.0) -> WhittleSolution:
    """
    Run the recursions on Gamma_0..Gamma_p, shape (p + 1, d, d) or (p + 1,).

    ``step`` only rescales the reported kernel quantities; with the default
    the raw coefficients come back unscaled.
    """
    gammas = np.asarray(autocov, dtype=float)
    if gammas.ndim == 1:
        gammas = gammas[:, None, None]
    if gammas.ndim != 3 or gammas.shape[1] != gammas.shape[2] or gammas.shape[0] < 2:
        raise InvalidParameter("autocovariance must have shape (p + 1, d, d) with p >= 1")
    p, d = gammas.shape[0] - 1, gammas.shape[1]
    eye = np.eye(d)

    A = np.zeros((p + 1, d, d))
    B = np.zeros((p + 1, d, d))
    A[0] = B[0] = eye
    V = np.empty((p + 1, d, d))
    Vs = np.empty((p + 1, d, d))
    V[0] = Vs[0] = gammas[0]
    partial = np.empty((p, d, d))
    partial_star = np.empty((p, d, d))

    for n in range(p):
        lags = gammas[n + 1 - np.arange(n + 1)]  # Gamma_{n+1-k}, k = 0..n
        delta = np.einsum("kij,kjl->il", A[: n + 1], lags)
        delta_star = np.einsum("kij,klj->il", B[: n + 1], lags)

        a = -_right_divide(delta, Vs[n], n + 1)
        b = -_right_divide(delta_star, V[n], n + 1)

        prev_A = A[1 : n + 1].copy()
        A[1 : n + 1] += np.einsum("ij,kjl->kil", a, B[n:0:-1])
        B[1 : n + 1] += np.einsum("ij,kjl->kil", b, prev_A[::-1])
        A[n + 1] = a
        B[n + 1] = b

        V[n + 1] = V[n] + a @ delta_star
        Vs[n + 1] = Vs[n] + b @ delta
        partial[n] = -a / step
        partial_star[n] = -b / step

    return WhittleSolution(
        A=A,
        A_star=B,
        V=V / step,
        V_star=Vs / step,
        gamma=partial,
        gamma_star=partial_star,
        step=step,
    )


def solve_whittle(problem: DiscretisedWH) -> WhittleSolution:
    """Whittle recursions on the bin-count autocovariances of the problem."""
    solution = whittle_recursion(problem.autocovariance(), problem.step)
    logger.debug("whittle: order %d, d=%d", solution.order, solution.dim)
    return solution
