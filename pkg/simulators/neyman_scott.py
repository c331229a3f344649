from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from pointprocess import EventStream
from pointprocess.errors import ConfigError, InvalidParameter
from pointprocess.kernels import BaseKernel, build_kernel

from simulators import Simulator, register
from simulators.poisson import as_rates, check_horizon, poisson_events
from simulators.rng import make_rng

logger = logging.getLogger(__name__)

# Nodes of the tabulated cluster-offset distribution, per kernel entry.
_CDF_NODES = 4096


@dataclass(frozen=True, eq=False)
class NeymanScottParams:
    """
    Latent Poisson rates and the shot kernel of a Neyman-Scott process.

    A latent point at s with mark i spawns a Poisson cluster in coordinate j
    with intensity shot_kernel_ij(t - s).
    """

    latent_rates: np.ndarray
    shot_kernel: BaseKernel

    def __post_init__(self) -> None:
        rates = as_rates(self.latent_rates, "latent_rates")
        kernel = build_kernel(self.shot_kernel)
        if kernel.dim != rates.size:
            raise InvalidParameter(
                "latent rates and shot kernel dimensions differ",
                latent_rates=rates.size,
                kernel=kernel.dim,
            )
        if not np.all(np.isfinite(kernel.support)):
            raise InvalidParameter("shot kernels need compact support", support=kernel.support)
        reach = float(kernel.support.max())
        probe = np.linspace(0.0, reach, _CDF_NODES + 1) if reach > 0 else np.zeros(1)
        if np.min(kernel.evaluate(probe)) < 0:
            raise InvalidParameter("shot kernels must be entrywise non-negative")
        object.__setattr__(self, "latent_rates", rates)
        object.__setattr__(self, "shot_kernel", kernel)

    @property
    def dim(self) -> int:
        return int(self.latent_rates.size)

    def stationary_rates(self) -> np.ndarray:
        """Observed mean rates: lambda_j = sum_i nu_i int Theta_ij."""
        return self.latent_rates @ self.shot_kernel.integral()

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "neyman_scott",
            "latent_rates": self.latent_rates.tolist(),
            "shot_kernel": self.shot_kernel.to_dict(),
        }


def _offset_table(kernel: BaseKernel, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and normalised CDF of the offset density Theta_ij on its support."""
    h = float(kernel.support[i, j])
    nodes = np.linspace(0.0, h, _CDF_NODES + 1)
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    mass = kernel.evaluate(mids)[:, i, j] * (h / _CDF_NODES)
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    return nodes, cdf / cdf[-1]


def simulate_neyman_scott(
    params: NeymanScottParams,
    horizon: float,
    seed: int,
    return_latent: bool = False,
) -> EventStream | tuple[EventStream, EventStream]:
    """
    Draw the observed cluster stream on [0, horizon).

    Latent points are drawn on [-H, horizon), H the largest shot support, so
    clusters reaching into the window from before it are included. With
    return_latent the latent points inside [0, horizon) come back as well.
    """
    horizon = check_horizon(horizon)
    rng = make_rng(seed)
    kernel = params.shot_kernel
    d = params.dim
    reach = float(kernel.support.max())
    latent_t, latent_m = poisson_events(rng, params.latent_rates, -reach, horizon)
    means = kernel.integral()

    times: list[np.ndarray] = []
    marks: list[np.ndarray] = []
    for i in range(d):
        parents = latent_t[latent_m == i]
        for j in range(d):
            if means[i, j] <= 0 or parents.size == 0:
                continue
            sizes = rng.poisson(means[i, j], size=parents.size)
            total = int(sizes.sum())
            if not total:
                continue
            nodes, cdf = _offset_table(kernel, i, j)
            offsets = np.interp(rng.random(total), cdf, nodes)
            children = np.repeat(parents, sizes) + offsets
            keep = (children >= 0.0) & (children < horizon)
            times.append(children[keep])
            marks.append(np.full(int(keep.sum()), j, dtype=np.int64))

    all_times = np.concatenate(times) if times else np.empty(0)
    all_marks = np.concatenate(marks) if marks else np.empty(0, dtype=np.int64)
    order = np.argsort(all_times, kind="stable")
    all_times, all_marks = all_times[order], all_marks[order]
    keep = np.ones(all_times.size, dtype=bool)
    keep[1:] = np.diff(all_times) > 0
    observed = EventStream(times=all_times[keep], marks=all_marks[keep], horizon=horizon, dim=d)
    logger.debug(
        "neyman-scott: %d latent points, %d observed events on [0, %g)",
        latent_t.size,
        len(observed),
        horizon,
    )
    if not return_latent:
        return observed
    inside = latent_t >= 0.0
    latent = EventStream(times=latent_t[inside], marks=latent_m[inside], horizon=horizon, dim=d)
    return observed, latent


@register
class NeymanScottSimulator(Simulator):
    key = "neyman_scott"
    name = "Neyman-Scott cluster process"

    def parse_params(self, spec: dict[str, Any]) -> NeymanScottParams:
        missing = {"latent_rates", "shot_kernel"} - set(spec)
        if missing:
            raise ConfigError(f"neyman_scott model needs {sorted(missing)}")
        return NeymanScottParams(spec["latent_rates"], spec["shot_kernel"])

    def simulate(self, params: NeymanScottParams, horizon: float, seed: int) -> EventStream:
        return simulate_neyman_scott(params, horizon, seed)
