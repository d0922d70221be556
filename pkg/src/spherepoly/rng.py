"""Counter-based random streams.

Every stream is a Philox generator keyed by (master_seed, tag, *indices), so
the numbers a replicate sees do not depend on which worker runs it or in
which order.
"""

import zlib

import numpy as np


def tag_id(tag: str) -> int:
    # stable across processes, unlike hash()
    return zlib.crc32(tag.encode("utf-8"))


def seed_sequence(master_seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    if master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    return np.random.SeedSequence([int(master_seed), tag_id(tag), *(int(i) for i in indices)])


def stream(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, tag, *indices)))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.Philox(rng))
    raise TypeError(f"cannot make a random stream from {type(rng).__name__}")
