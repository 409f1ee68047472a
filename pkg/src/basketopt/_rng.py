"""Stateless seed derivation for reproducible parallel Monte Carlo.

Every random stream in the package is keyed by mixing integer labels
(replicate index, look index, arm subset, stream tag) into a base seed
with a splitmix64-style hash. Streams therefore depend only on their
labels, never on execution order, chunking, or thread count.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Stream tags keep logically distinct streams disjoint even when the
# remaining labels collide.
STREAM_PATIENTS = 1
STREAM_ANALYSIS = 2


def _splitmix64(state: int) -> int:
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(base: int, *labels: int) -> int:
    """Fold integer labels into a 64-bit seed, order-sensitively."""
    state = _splitmix64(base & _MASK)
    for lab in labels:
        state = _splitmix64(state ^ (lab & _MASK))
    return state


def generator(seed: int) -> np.random.Generator:
    """The package-wide PRNG construction for a derived seed."""
    return np.random.Generator(np.random.PCG64(seed))
