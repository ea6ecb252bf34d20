"""Distractor sampling and option-order shuffling."""

from __future__ import annotations

from ..errors import DataError
from ..rng import SplitMix64


def sample_distractors(correct: str, pool: list[str], k: int, seed: int) -> list[str]:
    """k distinct wrong options drawn deterministically from the candidate pool."""
    seen: set[str] = set()
    candidates: list[str] = []
    for text in pool:
        if text == correct or text in seen:
            continue
        seen.add(text)
        candidates.append(text)
    if len(candidates) < k:
        raise DataError(
            f"distractor pool too small: need {k}, have {len(candidates)} distinct "
            f"candidates (pool size {len(pool)})"
        )
    return SplitMix64(seed).sample_prefix(candidates, k)


def shuffle_options(correct: str, distractors: list[str], seed: int) -> tuple[list[str], int]:
    """Uniformly shuffled option list plus the correct answer's new index."""
    options = [correct, *distractors]
    SplitMix64(seed).shuffle(options)
    return options, options.index(correct)
