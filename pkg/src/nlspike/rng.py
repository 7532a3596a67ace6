"""Deterministic random streams.

All sampling in the package goes through a counter-based Philox generator so
that a 64-bit seed fully determines the output, and independent streams for
parallel work are derived by mixing (base seed, stream index) through a
splitmix64 finalizer rather than by sequential jumping.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, index: int) -> int:
    """Derive the seed for stream `index` from a 64-bit base seed.

    Distinct (base, index) pairs map to well-separated Philox keys, so
    per-trial streams are independent regardless of scheduling order.
    """
    return _splitmix64((base & _MASK64) ^ _splitmix64(index & _MASK64))


def generator(seed: int) -> np.random.Generator:
    """Philox-backed Generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
