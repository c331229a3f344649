from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any

from pointprocess import EventStream
from pointprocess.conf import worker_count

from simulators import get_simulator
from simulators.rng import replicate_seed

logger = logging.getLogger(__name__)


def _simulate_one(job: tuple[str, Any, float, int]) -> EventStream:
    key, params, horizon, seed = job
    return get_simulator(key).simulate(params, horizon, seed)


def simulate_replicates(
    model: str,
    params: Any,
    horizon: float,
    seed: int,
    n: int,
    workers: int | None = None,
) -> list[EventStream]:
    """
    Draw n independent streams; replicate r uses seed + r.

    The output order follows the replicate index whatever the worker count,
    so results do not depend on scheduling.
    """
    get_simulator(model)
    jobs = [(model, params, horizon, replicate_seed(seed, r)) for r in range(n)]
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or n < 2:
        streams = [_simulate_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, n)) as pool:
            streams = list(pool.map(_simulate_one, jobs))
    logger.info(
        "simulated %d %s replicates (T=%g, seed=%d, workers=%d)", n, model, horizon, seed, workers
    )
    return streams
