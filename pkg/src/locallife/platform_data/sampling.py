"""Deterministic sampling of store records.

The sample is the prefix of a seeded Fisher-Yates shuffle (see locallife.rng
for the exact stream contract), so identical (store, n, seed) inputs yield
identical output order on every machine.
"""

from __future__ import annotations

from ..errors import DataError
from ..rng import SplitMix64
from .records import Record, Store


def sample_entities(store: Store, n: int, seed: int) -> list[Record]:
    if n < 0:
        raise DataError(f"sample size must be non-negative, got {n}")
    if n > len(store):
        raise DataError(f"cannot sample {n} records from a store of {len(store)}")
    rng = SplitMix64(seed)
    return rng.sample_prefix(store.records, n)
