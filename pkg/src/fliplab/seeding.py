"""Deterministic seed derivation.

All randomness in the package flows through one mixing function so that
experiments are reproducible and sub-streams are independent: changing one
model, flip fraction, or trial never perturbs the random draws of another.

The mixing function: the parts (master seed plus any mix of strings, ints
and floats) are joined into a canonical text key ``part1|part2|...`` (floats
via ``repr``) and hashed with SHA-256; the first 8 bytes, little-endian,
become a 64-bit seed. This is stable across platforms, processes, and Python
versions, unlike ``hash()``.
"""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Mix the given parts into a 64-bit seed."""
    key = "|".join(_canonical(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(*parts) -> np.random.Generator:
    """A fresh PCG64 generator seeded from the mixed parts."""
    return np.random.default_rng(derive_seed(*parts))


def _canonical(part) -> str:
    if isinstance(part, bool):
        raise TypeError("booleans are ambiguous seed parts")
    if isinstance(part, (int, str)):
        return str(part)
    if isinstance(part, float):
        return repr(part)
    raise TypeError(f"cannot mix {type(part).__name__} into a seed")
