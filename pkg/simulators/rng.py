"""
Random streams.

Every simulation draws from numpy's Philox generator, a counter-based
generator (Random123 Philox-4x64-10) whose output depends only on the key, so
a seed reproduces the same stream on any platform. Seeds are unsigned 64-bit
integers; replicate r of a batch uses seed + r (mod 2**64).
"""
from __future__ import annotations

import numpy as np

from pointprocess.errors import InvalidParameter

SEED_LIMIT = 2**64


def make_rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidParameter("seed must be an integer", seed=str(seed))
    if not 0 <= int(seed) < SEED_LIMIT:
        raise InvalidParameter("seed must be an unsigned 64-bit integer", seed=int(seed))
    return np.random.Generator(np.random.Philox(int(seed)))


def replicate_seed(seed: int, index: int) -> int:
    return (int(seed) + int(index)) % SEED_LIMIT
