"""Deterministic seed derivation and RNG construction.

Every stochastic step in the toolkit draws from a PCG64 generator whose
seed is mixed from a master seed plus the identifying coordinates of the
step (scenario labels, training size, repeat index, run index, ...).
The mix is a SplitMix64 chain, so derived seeds are stable across
platforms and independent of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _to_u64(part: int | str) -> int:
    if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
        return int(part) & _MASK64
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"seed components must be int or str, got {type(part).__name__}")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int | str) -> int:
    """Fold ints and strings into one 64-bit seed (order-sensitive)."""
    state = 0
    for part in parts:
        state = _splitmix64(state ^ _to_u64(part))
    return state


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for the given seed; the toolkit-wide RNG choice."""
    return np.random.Generator(np.random.PCG64(seed))
