"""Seed derivation and normal variates.

Every path (or replication) ``k`` of a run seeded with ``seed`` draws from
its own generator, seeded with ``sub_seed(seed, k)``.  The sub-seed is the
``k``-th output of the SplitMix64 sequence started at ``seed`` (Steele,
Lea & Flood 2014), so the stream assignment does not depend on how the
work is split across workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

SUBSEED_METHOD = "splitmix64(seed + (k+1)*0x9E3779B97F4A7C15)"
NORMAL_METHOD = "numpy.random.Generator(PCG64).standard_normal (ziggurat)"


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def sub_seed(seed: int, index: int) -> int:
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return splitmix64(check_seed(seed) + (index + 1) * GOLDEN_GAMMA)


def generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(sub_seed(seed, index)))


def standard_normals(seed: int, index: int, size: int) -> np.ndarray:
    return generator(seed, index).standard_normal(size)
