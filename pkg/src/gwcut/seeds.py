"""Deterministic random streams.

Every random draw in the package flows through a counter-based Philox
generator keyed by a tuple of integers, so any (master seed, trial index,
purpose) combination names one reproducible stream regardless of execution
order or worker count.
"""
from __future__ import annotations

import numpy as np

# Stream tags used to derive independent per-trial streams.
STREAM_GRAPH = 0
STREAM_FIELD = 1
STREAM_MARKS = 2


def _as_key(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed) & 0xFFFFFFFFFFFFFFFF,)  # two's complement; SeedSequence wants >= 0
    out: list[int] = []
    for part in seed:
        out.extend(_as_key(part))
    return tuple(out)


def seed_sequence(seed) -> np.random.SeedSequence:
    """SeedSequence for an integer seed or a tuple of integers."""
    return np.random.SeedSequence(_as_key(seed))


def rng_from(seed) -> np.random.Generator:
    """Philox generator keyed by `seed` (int or tuple of ints)."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def state_from(seed) -> int:
    """A single 64-bit state word derived from `seed`, for inline RNGs."""
    return int(seed_sequence(seed).generate_state(1, dtype=np.uint64)[0])
