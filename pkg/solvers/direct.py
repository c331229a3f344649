"""
Direct solve of the discretised Wiener-Hopf system.

With Phi_k = step * K((k - 1/2) step) the equation becomes the block
Yule-Walker system sum_k Phi_k Gamma_{j-k} = Gamma_j, j = 1..p, i.e.
Phi T = R with T the block-Toeplitz matrix [Gamma_{j-k}] and
R = [Gamma_1 ... Gamma_p].
"""
from __future__ import annotations

import logging
import warnings

import numpy as np
import scipy.linalg

from pointprocess import KernelGrid
from pointprocess.errors import InvalidParameter, SingularSystem

from .problem import DiscretisedWH
from .whittle import whittle_recursion

logger = logging.getLogger(__name__)

METHODS = ("dense", "levinson")


def _lag_sequence(gammas: np.ndarray) -> np.ndarray:
    """Gamma_{-(p-1)}..Gamma_{p-1} as one (2p - 1, d, d) array."""
    p = gammas.shape[0] - 1
    negative = np.swapaxes(gammas[p - 1 : 0 : -1], 1, 2)
    return np.concatenate([negative, gammas[:p]])


def block_toeplitz(gammas: np.ndarray) -> np.ndarray:
    """The (p d, p d) matrix whose block (k, j) is Gamma_{j-k}."""
    p, d = gammas.shape[0] - 1, gammas.shape[1]
    seq = _lag_sequence(gammas)
    big = np.empty((p * d, p * d))
    for k in range(p):
        row = seq[p - 1 - k : 2 * p - 1 - k]  # Gamma_{j-k}, j = 0..p-1
        big[k * d : (k + 1) * d] = row.transpose(1, 0, 2).reshape(d, p * d)
    return big


def yule_walker_dense(gammas: np.ndarray) -> np.ndarray:
    """Phi_1..Phi_p, shape (p, d, d), by one dense LU solve."""
    p, d = gammas.shape[0] - 1, gammas.shape[1]
    big = block_toeplitz(gammas)
    rhs = gammas[1:].transpose(1, 0, 2).reshape(d, p * d)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            # Phi T = R  <=>  T^T Phi^T = R^T
            phi_t = scipy.linalg.solve(big, rhs.T, transposed=True, overwrite_b=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        raise SingularSystem(
            "block-Toeplitz system is singular", condition=float(np.linalg.cond(big))
        ) from e
    return phi_t.T.reshape(d, p, d).transpose(1, 0, 2)


def solve_direct(problem: DiscretisedWH, method: str = "dense") -> KernelGrid:
    """
    Kernel on the problem's grid.

    ``dense`` assembles the full p d x p d system; ``levinson`` exploits the
    Toeplitz structure through the block recursions. Both solve the same
    equations.

    Raises:
        SingularSystem: the dense system matrix is singular
        SingularErrorMatrix: a Levinson error matrix is singular
    """
    if method not in METHODS:
        raise InvalidParameter(f"unknown direct method: {method}", known=list(METHODS))
    gammas = problem.autocovariance()
    if method == "dense":
        phi = yule_walker_dense(gammas)
    else:
        phi = -whittle_recursion(gammas).A[1:]
    logger.debug("direct solve (%s): order %d, d=%d", method, problem.order, problem.dim)
    return KernelGrid(problem.kernel_grid, phi / problem.step)
