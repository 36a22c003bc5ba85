"""Keyed, counter-based random streams.

One master seed fans out into independent Philox streams addressed by
``(purpose, index)``. Re-running one stage never shifts another stage's draws.
"""

import zlib

import numpy as np


def purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Generator for the ``(purpose, index)`` sub-stream of ``seed``."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose_key(purpose), int(index)))
    return np.random.Generator(np.random.Philox(sequence))
