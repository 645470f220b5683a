"""Seeded random streams.

Every stream is a PCG64 generator keyed by ``SeedSequence([seed, *keys])``.
String keys are mapped to integers with CRC-32 so the mapping is stable
across interpreters (unlike ``hash``).
"""

import zlib

import numpy as np

__all__ = ["make_rng", "RNG_ALGORITHM"]

RNG_ALGORITHM = "PCG64"


def _key(k):
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    k = int(k)
    if k < 0:
        raise ValueError(f"seed components must be nonnegative, got {k}")
    return k


def make_rng(seed, *keys) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``; e.g. ``make_rng(7, "trial", 3)``."""
    ss = np.random.SeedSequence([_key(seed), *(_key(k) for k in keys)])
    return np.random.Generator(np.random.PCG64(ss))
