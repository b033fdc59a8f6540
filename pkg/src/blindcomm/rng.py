"""Seeded random streams.

Every experiment is driven by one 64-bit seed. Independent streams for
trials, sweep points or individual draws are derived with :func:`stream`,
which feeds the seed and an integer key path into numpy's ``SeedSequence``.
Two calls with the same ``(seed, *keys)`` always return generators that
produce identical sequences, and streams with different key paths are
statistically independent, so trials can run in any order or in parallel.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for ``seed`` split along the key path ``keys``."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
