import zlib

import numpy as np


def substream(seed: int, name: str, *index: int) -> np.random.Generator:
    """Independent generator for a named consumer of the master seed."""
    key = [int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode()), *(int(i) for i in index)]
    return np.random.default_rng(np.random.SeedSequence(key))


def subseed(seed: int, name: str, *index: int) -> int:
    return int(substream(seed, name, *index).integers(0, 2**31 - 1))
