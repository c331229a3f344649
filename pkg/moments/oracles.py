"""
Closed-form and brute-force covariance densities used as test oracles.

hawkes_covariance_oracle inverts the Bartlett spectrum of a univariate
stationary Hawkes process numerically; neyman_scott_covariance_oracle
evaluates the cluster second moment by direct convolution of the shot kernel.
random_stationary_covariance builds valid multivariate covariances for solver
batteries and benchmarks.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.interpolate import CubicSpline

from pointprocess import CovarianceGrid, LagGrid
from pointprocess.conf import get_setting
from pointprocess.errors import InvalidParameter, UnstableKernel
from pointprocess.kernels import BaseKernel, ExponentialKernel, build_kernel
from simulators.neyman_scott import NeymanScottParams
from simulators.rng import make_rng

logger = logging.getLogger(__name__)


def hawkes_covariance_oracle(
    eta: float,
    kernel: BaseKernel | dict,
    grid: LagGrid,
    n_nodes: int | None = None,
    cutoff: float | None = None,
) -> CovarianceGrid:
    """
    Covariance density of a stationary univariate Hawkes process.

    The spectral density of the reduced covariance is
    (rate / 2 pi) * (|1 - K^(w)|^-2 - 1), with rate = eta / (1 - int K).
    It is integrated by FFT on [-W, W) with W = cutoff * characteristic rate,
    raised if needed so the lag resolution pi / W is at most step / 4, then
    interpolated onto the grid midpoints with a cubic spline.
    """
    kernel = build_kernel(kernel)
    if kernel.dim != 1:
        raise InvalidParameter("the spectral oracle is univariate", dim=kernel.dim)
    branching = float(kernel.integral()[0, 0])
    if not branching < 1.0:
        raise UnstableKernel(
            f"kernel integral {branching:.6g} must be < 1", spectral_radius=branching
        )
    if not eta > 0:
        raise InvalidParameter("baseline must be positive", eta=eta)
    rate = eta / (1.0 - branching)
    if branching == 0.0:
        return CovarianceGrid(grid, [rate], np.zeros(grid.length))

    n_nodes = int(n_nodes or get_setting("BLP_ORACLE_NODES"))
    cutoff = float(cutoff or get_setting("BLP_ORACLE_CUTOFF"))
    w_max = max(cutoff * kernel.characteristic_rate, 4.0 * math.pi / grid.step)
    dtau = math.pi / w_max
    needed = int(math.ceil(grid.span / dtau)) + 4
    if needed > n_nodes // 2:
        raise InvalidParameter(
            "FFT too short for the requested lag span",
            n_nodes=n_nodes,
            needed=2 * needed,
        )

    omega = 2.0 * math.pi * np.fft.fftfreq(n_nodes, d=dtau)
    transfer = kernel.fourier(omega)[:, 0, 0]
    spectrum = 1.0 / np.abs(1.0 - transfer) ** 2 - 1.0
    samples = (rate / dtau) * np.fft.ifft(spectrum).real[:needed]
    taus = np.arange(needed) * dtau
    density = CubicSpline(taus, samples)(grid.lags)
    logger.debug(
        "hawkes oracle: rate=%g, W=%g, dtau=%g, nodes=%d", rate, w_max, dtau, n_nodes
    )
    return CovarianceGrid(grid, [rate], density)


def exponential_hawkes_covariance_oracle(
    eta: float, alpha: float, beta: float, grid: LagGrid, **kwargs
) -> CovarianceGrid:
    """Oracle for the kernel alpha * exp(-beta t); requires alpha < beta."""
    if not alpha < beta:
        raise UnstableKernel(
            f"alpha / beta = {alpha / beta:.6g} must be < 1", spectral_radius=alpha / beta
        )
    return hawkes_covariance_oracle(eta, ExponentialKernel(alpha, beta), grid, **kwargs)


def exponential_hawkes_density(eta: float, alpha: float, beta: float, tau: np.ndarray) -> np.ndarray:
    """Closed form c(tau) for the untruncated exponential kernel, tau > 0."""
    rate = eta / (1.0 - alpha / beta)
    gap = beta - alpha
    return rate * alpha * (2 * beta - alpha) / (2 * gap) * np.exp(-gap * np.asarray(tau))


def neyman_scott_covariance_oracle(
    params: NeymanScottParams, grid: LagGrid, oversample: int = 20
) -> CovarianceGrid:
    """
    C_ab(tau) = sum_i nu_i * int Theta_ia(u) Theta_ib(u + tau) du

    by midpoint quadrature with step grid.step / oversample. The oversample
    factor must be even so every grid lag lands on a quadrature node.
    """
    if oversample < 2 or oversample % 2:
        raise InvalidParameter("oversample must be an even integer >= 2", oversample=oversample)
    kernel = params.shot_kernel
    d = params.dim
    fine = grid.step / oversample
    reach = float(kernel.support.max())
    n_fine = max(1, int(math.ceil(reach / fine)))
    nodes = (np.arange(n_fine) + 0.5) * fine
    theta = kernel.evaluate(nodes)  # (n_fine, d, d)

    density = np.zeros((grid.length, d, d))
    shifts = np.arange(grid.length) * oversample + oversample // 2
    for k, shift in enumerate(shifts):
        if shift >= n_fine:
            break
        head = theta[: n_fine - shift]
        tail = theta[shift:]
        # sum over latent mark i and node u of nu_i Theta_ia(u) Theta_ib(u + tau)
        density[k] = fine * np.einsum("i,uia,uib->ab", params.latent_rates, head, tail)
    return CovarianceGrid(grid, params.stationary_rates(), density)


def random_stationary_covariance(
    grid: LagGrid, dim: int, seed: int, components: int = 3, strength: float = 0.5
) -> CovarianceGrid:
    """
    A valid covariance density built from exponential modes.

    C(tau) = sum_r a_r a_r^T exp(-b_r |tau|) with random loadings a_r and decay
    rates b_r; each mode is a positive-definite function and the atom
    diag(rates) dominates, so the bin-count blocks form a positive-definite
    block-Toeplitz sequence.
    """
    rng = make_rng(seed)
    rates = rng.uniform(1.0, 2.0, size=dim)
    loadings = rng.normal(size=(components, dim))
    loadings *= math.sqrt(strength / components) / np.linalg.norm(loadings, axis=1, keepdims=True)
    decays = rng.uniform(0.5, 2.0, size=components)
    lags = grid.lags
    modes = np.einsum("ra,rb->rab", loadings, loadings)
    density = np.einsum("kr,rab->kab", np.exp(-np.outer(lags, decays)), modes)
    return CovarianceGrid(grid, rates, density)
