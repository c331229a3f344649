"""
Innovations algorithm for stationary bin-count sequences.

The one-step predictor is written in terms of past innovations,
X^_{t+1} = sum_{h=1..t} Theta(t, h) (X_{t+1-h} - X^_{t+1-h}), and

    Theta(t, t-k) = (Gamma_{t-k} - sum_{j<k} Theta(t, t-j) V_j Theta(k, k-j)^T) V_k^-1
    V_t = Gamma_0 - sum_{j<t} Theta(t, t-j) V_j Theta(t, t-j)^T

for k = 0..t-1. In particular Theta(t, t) V_0 = Gamma_t on every row.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from pointprocess import CovarianceGrid
from pointprocess.errors import InvalidParameter, SingularV

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class InnovationsSolution:
    """
    theta: (n + 1, n + 1, d, d); theta[t, h] for 1 <= h <= t, zero elsewhere.
    V: (n + 1, d, d) innovation covariances.

    Both are divided by step, so with a covariance grid they are densities
    per unit time; on a raw sequence (step 1) they are the plain coefficients.
    """

    theta: np.ndarray
    V: np.ndarray
    step: float

    @property
    def length(self) -> int:
        return int(self.V.shape[0] - 1)

    @property
    def dim(self) -> int:
        return int(self.V.shape[1])

    def row(self, t: int) -> np.ndarray:
        """Theta(t, 1..t), shape (t, d, d)."""
        if not 0 <= t <= self.length:
            raise InvalidParameter("row outside the solution", t=t, n=self.length)
        return self.theta[t, 1 : t + 1]

    def to_dict(self) -> dict[str, Any]:
        entries = [
            {"t": t, "h": h, "values": self.theta[t, h].reshape(-1).tolist()}
            for t in range(1, self.length + 1)
            for h in range(1, t + 1)
        ]
        return {
            "delta": self.step,
            "n": self.length,
            "d": self.dim,
            "theta": entries,
            "V": [v.reshape(-1).tolist() for v in self.V],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> InnovationsSolution:
        try:
            n, d = int(data["n"]), int(data["d"])
            theta = np.zeros((n + 1, n + 1, d, d))
            for entry in data["theta"]:
                theta[int(entry["t"]), int(entry["h"])] = np.reshape(entry["values"], (d, d))
            V = np.asarray(data["V"], dtype=float).reshape(n + 1, d, d)
            return cls(theta=theta, V=V, step=float(data["delta"]))
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InvalidParameter(f"malformed innovations document: {e}") from e


def innovations_recursion(autocov: np.ndarray, step: float = 1.0) -> InnovationsSolution:
    """
    Run the recursion on Gamma_0..Gamma_n, shape (n + 1, d, d) or (n + 1,).

    Raises:
        SingularV: V_k is not positive definite; ``index`` is k
    """
    gammas = np.asarray(autocov, dtype=float)
    if gammas.ndim == 1:
        gammas = gammas[:, None, None]
    if gammas.ndim != 3 or gammas.shape[1] != gammas.shape[2] or gammas.shape[0] < 1:
        raise InvalidParameter("autocovariance must have shape (n + 1, d, d)")
    n, d = gammas.shape[0] - 1, gammas.shape[1]

    theta = np.zeros((n + 1, n + 1, d, d))
    V = np.empty((n + 1, d, d))
    factors = []

    def factor(k: int) -> Any:
        try:
            return cho_factor(V[k])
        except np.linalg.LinAlgError as e:
            raise SingularV(
                f"innovation covariance V_{k} is not positive definite",
                index=k,
                eigenvalues=np.linalg.eigvalsh(V[k]),
            ) from e

    V[0] = gammas[0]
    factors.append(factor(0))
    for t in range(1, n + 1):
        for k in range(t):
            h = t - k
            js = np.arange(k)
            acc = gammas[h].copy()
            if k:
                acc -= np.einsum(
                    "jab,jbc,jdc->ad", theta[t, t - js], V[:k], theta[k, k - js]
                )
            # acc @ inv(V_k) with V_k symmetric
            theta[t, h] = cho_solve(factors[k], acc.T).T
        js = np.arange(t)
        vt = gammas[0] - np.einsum("jab,jbc,jdc->ad", theta[t, t - js], V[:t], theta[t, t - js])
        V[t] = 0.5 * (vt + vt.T)
        factors.append(factor(t))

    return InnovationsSolution(theta=theta / step, V=V / step, step=step)


def solve_innovations(cov: CovarianceGrid, n: int | None = None) -> InnovationsSolution:
    """Innovations recursion on the first n + 1 bin-count autocovariances of ``cov``."""
    n = cov.grid.length if n is None else int(n)
    if not 1 <= n <= cov.grid.length:
        raise InvalidParameter("innovations length outside the grid", n=n, p=cov.grid.length)
    solution = innovations_recursion(cov.autocovariance(n), cov.grid.step)
    logger.debug("innovations: %d rows, d=%d", n, cov.dim)
    return solution
