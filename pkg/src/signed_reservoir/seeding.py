"""Seed handling.

Every stochastic routine takes an explicit unsigned integer seed. Generators
are numpy ``PCG64`` bit generators fed by ``SeedSequence``; child streams are
derived by hashing ``(base_seed, *path)`` through ``SeedSequence`` entropy
pooling, so sibling cells of a sweep never share a stream.
"""
from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be unsigned, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_seed(base_seed: int, *path: int) -> int:
    """Hash ``base_seed`` and an integer path into a new 64-bit seed.

    ``derive_seed(s, g, r)`` is the seed used for realization ``r`` at grid
    point ``g``. The mapping is deterministic and platform independent.
    """
    if base_seed < 0 or any(p < 0 for p in path):
        raise ValueError("seeds and path components must be non-negative")
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
