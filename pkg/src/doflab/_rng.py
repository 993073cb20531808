"""Deterministic, splittable random streams.

Every random draw in the package goes through :func:`make_rng`. The
generator is numpy's PCG64 (a 64-bit permuted congruential generator)
seeded from a ``SeedSequence`` whose spawn key encodes the call path, so a
stream is fully determined by ``(seed, *path)`` and independent of how many
other streams were drawn before it.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["make_rng", "sub_seed", "standard_normal"]


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode("utf-8"))


def make_rng(seed: int, *path) -> np.random.Generator:
    """Return a PCG64 generator for ``seed`` and a path of ints or strings."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def sub_seed(seed: int, index: int) -> int:
    """Derive the 64-bit sub-seed of grid point ``index`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def standard_normal(seed: int, shape, *path) -> np.ndarray:
    return make_rng(seed, *path).standard_normal(shape)
