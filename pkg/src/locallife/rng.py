"""Deterministic, portable randomness.

Every random choice in this package flows through the SplitMix64 generator
below so that fixtures are reproducible across runs, machines, and
reimplementations in other languages.  The contract, in full:

* state starts at the 64-bit seed; each draw advances it by the golden-gamma
  constant 0x9E3779B97F4A7C15 (mod 2**64) and returns murmur-style mixed bits;
* ``randbelow(n)`` is one draw reduced modulo ``n``;
* a shuffle is an in-place Fisher-Yates pass, ``j = i + randbelow(len - i)``
  for ``i = 0 .. len-2``; a sample of size ``n`` is the first ``n`` elements
  of the partially shuffled list (the loop stops after ``n`` positions);
* derived seeds come from the first 8 bytes (big-endian) of
  ``sha256("label0/label1/...")`` XORed with the parent seed.
"""

from __future__ import annotations

import hashlib
from collections.abc import Sequence
from typing import TypeVar

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

T = TypeVar("T")


class SplitMix64:
    """64-bit SplitMix generator (Steele et al. variant used by java.util)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        return self.next_u64() % n

    def shuffle(self, items: list[T]) -> list[T]:
        """In-place Fisher-Yates shuffle; returns the same list."""
        for i in range(len(items) - 1):
            j = i + self.randbelow(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items

    def sample_prefix(self, items: Sequence[T], n: int) -> list[T]:
        """First ``n`` elements of a Fisher-Yates pass over a copy of ``items``."""
        if n > len(items):
            raise ValueError(f"cannot sample {n} from {len(items)} items")
        pool = list(items)
        for i in range(n):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:n]


def derive_seed(seed: int, *labels: str) -> int:
    """Stable child seed for a named purpose; independent labels give independent streams."""
    digest = hashlib.sha256("/".join(labels).encode("utf-8")).digest()
    return (seed ^ int.from_bytes(digest[:8], "big")) & _MASK64


def splitmix_stream(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of SplitMix64(seed) as a uint64 array.

    Bit-identical to calling ``SplitMix64(seed).next_u64()`` ``count`` times;
    the i-th state is ``seed + (i+1) * gamma`` so the whole stream vectorizes.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        state = np.uint64(seed & _MASK64) + idx * np.uint64(_GAMMA)
        z = (state ^ (state >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))
