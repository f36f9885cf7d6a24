"""Deterministic seed derivation.

Every random quantity in a run is drawn from a generator derived from the
master seed plus a textual/index path, so results are reproducible and
independent of evaluation order or worker count.
"""

import zlib

import numpy as np


def seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for (master_seed, *path); path items are str or int."""
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    entropy = [int(master_seed)]
    for item in path:
        if isinstance(item, str):
            entropy.append(zlib.crc32(item.encode("utf-8")))
        else:
            value = int(item)
            if value < 0:
                raise ValueError(f"seed path entries must be non-negative, got {item}")
            entropy.append(value)
    return np.random.SeedSequence(entropy)


def rng_for(master_seed: int, *path) -> np.random.Generator:
    """Deterministic generator for (master_seed, *path)."""
    return np.random.default_rng(seed_sequence(master_seed, *path))
