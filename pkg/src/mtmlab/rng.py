"""Counter-based random streams.

A root seed is hashed into a Philox key once. Each stream is then addressed by
a small tuple of integers written into the high words of the Philox counter,
so ``stream(m)`` is the same generator no matter which process or thread asks
for it, or in which order. Chains use one stream per iteration; Monte Carlo
estimators use one stream per fixed-size block of replications.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

ITERATION = 0
BLOCK = 1
INIT = 2
CELL = 3


@dataclass(frozen=True)
class Streams:
    seed: int

    def __post_init__(self):
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")

    @cached_property
    def key(self):
        return np.random.SeedSequence(int(self.seed)).generate_state(2, np.uint64)

    def stream(self, kind, index, sub=0):
        """Generator for stream ``(kind, index, sub)``.

        The low counter word is left at zero and advances as draws are made.
        """
        counter = np.array([0, int(sub), int(index), int(kind)], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self.key, counter=counter))

    def iteration(self, m):
        return self.stream(ITERATION, m)

    def block(self, b, sub=0):
        return self.stream(BLOCK, b, sub)

    def child_seed(self, *words):
        """Derive an integer seed for a sub-experiment (grid cell, replicate)."""
        ss = np.random.SeedSequence([int(self.seed), *[int(w) for w in words]])
        return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def as_generator(rng):
    """Accept an int seed or an existing Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
