"""Seeded random streams.

Every consumer of randomness asks for a stream by (seed, tag).  The stream is a
numpy Philox generator keyed by a SeedSequence built from the 64-bit seed and a
CRC32 of the tag, so two different purposes never share state and the same
(seed, tag) always replays the same numbers.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def stream(seed: int, tag: str = "") -> np.random.Generator:
    seed = int(seed) & MASK64
    words = [seed & 0xFFFFFFFF, seed >> 32, zlib.crc32(tag.encode("utf-8"))]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 63-bit seed from an existing stream."""
    return int(rng.integers(0, 1 << 63))
