"""Seeded random streams.

Every random draw in the package comes from a Philox (counter-based)
generator keyed by ``(seed, *stream_ids)``. Splitting streams by id, rather
than consuming one generator sequentially, keeps each trial's randomness fixed
regardless of how many other trials run or in what order.
"""
from __future__ import annotations

import secrets

import numpy as np

SEED_BITS = 64


def fresh_seed() -> int:
    return secrets.randbits(SEED_BITS)


def stream(seed: int, *ids: int) -> np.random.Generator:
    if not 0 <= seed < (1 << SEED_BITS):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(ss))
