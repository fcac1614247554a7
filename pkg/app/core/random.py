"""
Named random streams.

Every stochastic operation takes an explicit ``numpy.random.Generator``.
Streams are built on the counter-based Philox bit generator and derived
from a 64-bit seed plus a path of integers, so results do not depend on
the order in which independent work items run.
"""
import zlib
from typing import Union

import numpy as np

StreamKey = Union[int, str]


def _key_to_int(key: StreamKey) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"stream key must be non-negative, got {key}")
    return int(key)


def stream(seed: int, *path: StreamKey) -> np.random.Generator:
    """Return the generator for ``(seed, *path)``.

    String path components are hashed with CRC32 so that named purposes
    ("noise", "extractor", ...) map to stable integers.
    """
    seed_seq = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=tuple(_key_to_int(k) for k in path),
    )
    return np.random.Generator(np.random.Philox(seed_seq))
