"""Deterministic derivation of generator sub-streams.

A sub-stream seed is the first 8 bytes (little-endian) of
``blake2b(f"{master}/{label}/{index}", digest_size=8)``; generators are
``numpy.random.Generator(PCG64(seed))``. Both pieces are platform
independent, so a run is reproducible from its master seed alone.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(master: int, label: str, index: int = 0) -> int:
    key = f"{int(master) & MASK64}/{label}/{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def derive_rng(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master, label, index)))


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(rng))
