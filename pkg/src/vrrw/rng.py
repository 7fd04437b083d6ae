"""Splittable, counter-based random streams.

Replica ``i`` of a run seeded with ``seed`` draws from a Philox generator keyed by
``SeedSequence(seed, spawn_key=(i,))``, so a replica's stream does not depend on
how many other replicas exist or on which worker runs it.
"""

import numpy as np

BLOCK = 2**20


def split(seed, i):
    """Independent generator for replica ``i`` of master ``seed``."""
    if seed < 0 or i < 0:
        raise ValueError("seed and replica index must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(i),))))


def uniform_blocks(gen, block=BLOCK):
    while True:
        yield gen.random(block)
