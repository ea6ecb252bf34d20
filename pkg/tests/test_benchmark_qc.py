from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import pytest

from locallife.benchmark import (
    DaySample,
    QCConfig,
    check_stat_sufficiency,
    compute_distance,
    detect_stable_trend,
    gate_annotations,
    sample_distractors,
    shuffle_options,
)
from locallife.errors import DataError
from locallife.platform_data import AnnotationRecord

QC = QCConfig()

FIXTURE = json.loads((Path(__file__).parent / "data" / "trend_fixture.json").read_text())


def days(condition: str, count: int, holiday_share: float, value: float = 1.0):
    holidays = round(count * holiday_share)
    return [
        DaySample(condition, value, is_holiday=(i < holidays)) for i in range(count)
    ]


def test_sufficiency_passes_balanced_ten_ten():
    groups = {"rainy": days("rainy", 10, 0.3), "sunny": days("sunny", 10, 0.3)}
    verdict = check_stat_sufficiency(groups, QC)
    assert verdict.passed
    assert verdict.clauses == []


def test_sufficiency_fails_nine_rainy_with_clause():
    groups = {"rainy": days("rainy", 9, 0.3), "sunny": days("sunny", 15, 0.3)}
    verdict = check_stat_sufficiency(groups, QC)
    assert not verdict.passed
    assert any(clause.startswith("rainy: 9 < 10") for clause in verdict.clauses)


def test_sufficiency_fails_holiday_imbalance():
    groups = {"rainy": days("rainy", 10, 0.9), "sunny": days("sunny", 10, 0.1)}
    verdict = check_stat_sufficiency(groups, QC)
    assert not verdict.passed
    assert any("holiday balance" in clause for clause in verdict.clauses)


def test_trend_identical_groups_is_none():
    values = [3.0, 4.0, 5.0, 4.0, 3.5, 4.2, 3.9, 4.1, 4.4, 3.7]
    verdict = detect_stable_trend(values, list(values), QC, seed=11)
    assert verdict.direction == "none"
    assert verdict.ci_low == verdict.ci_high == 0.0


def test_trend_disjoint_constant_groups():
    verdict = detect_stable_trend([20.0] * 10, [10.0] * 10, QC, seed=11)
    assert verdict.direction == "A_higher"
    assert verdict.ci_low > 0
    assert verdict.effect == pytest.approx(10.0)


def test_trend_swapping_groups_flips_direction():
    a, b = FIXTURE["group_a"], FIXTURE["group_b"]
    forward = detect_stable_trend(a, b, QC, seed=77)
    backward = detect_stable_trend(b, a, QC, seed=77)
    assert forward.direction == "A_higher"
    assert backward.direction == "B_higher"
    assert forward.ci_low == pytest.approx(-backward.ci_high, abs=1e-12)
    assert forward.ci_high == pytest.approx(-backward.ci_low, abs=1e-12)


# -- independent bootstrap oracle (sequential reimplementation of the
#    documented protocol, written without locallife.rng) ----------------------

_MASK = (1 << 64) - 1


def _oracle_stream(seed: int):
    state = seed & _MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        yield z ^ (z >> 31)


def _oracle_group_seed(seed: int, values: list[float]) -> int:
    digest = hashlib.sha256(
        ",".join(format(v, ".17g") for v in values).encode("ascii")
    ).hexdigest()
    label_digest = hashlib.sha256(f"bootstrap/{digest[:16]}".encode()).digest()
    return (seed ^ int.from_bytes(label_digest[:8], "big")) & _MASK


def _oracle_quantile(sorted_values: list[float], q: float) -> float:
    h = (len(sorted_values) - 1) * q
    lo = math.floor(h)
    frac = h - lo
    if lo + 1 >= len(sorted_values):
        return sorted_values[-1]
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def _oracle_bootstrap(a: list[float], b: list[float], resamples: int, ci: float, seed: int):
    # Labels must mirror derive_seed(seed, "bootstrap", digest16): sha256 of
    # the joined label path, XORed with the seed.
    stream_a = _oracle_stream(_oracle_group_seed(seed, a))
    stream_b = _oracle_stream(_oracle_group_seed(seed, b))
    diffs = []
    for _ in range(resamples):
        mean_a = sum(a[next(stream_a) % len(a)] for _ in range(len(a))) / len(a)
        mean_b = sum(b[next(stream_b) % len(b)] for _ in range(len(b))) / len(b)
        diffs.append(mean_a - mean_b)
    diffs.sort()
    alpha = (1 - ci) / 2
    lo = _oracle_quantile(diffs, alpha)
    hi = _oracle_quantile(diffs, 1 - alpha)
    direction = "A_higher" if lo > 0 else "B_higher" if hi < 0 else "none"
    return direction, lo, hi


def test_trend_fixture_matches_independent_bootstrap_oracle():
    a, b = FIXTURE["group_a"], FIXTURE["group_b"]
    verdict = detect_stable_trend(a, b, QC, seed=4242)
    direction, lo, hi = _oracle_bootstrap(a, b, QC.bootstrap_resamples, QC.ci_level, seed=4242)
    assert verdict.direction == direction
    assert verdict.ci_low == pytest.approx(lo, abs=1e-12)
    assert verdict.ci_high == pytest.approx(hi, abs=1e-12)


def annotations(*labels: str, dimension: str = "non_promotional"):
    return [
        AnnotationRecord(annotator_id=f"a{i}", dimension=dimension, label=label)
        for i, label in enumerate(labels)
    ]


def test_gate_accepts_unanimous_two_annotators():
    verdict = gate_annotations("non_promotional", annotations("yes", "yes"), QC)
    assert verdict.accepted
    assert verdict.label == "yes"


def test_gate_rejects_disagreement():
    verdict = gate_annotations("non_promotional", annotations("yes", "no"), QC)
    assert not verdict.accepted
    assert "consensus" in verdict.reason


def test_gate_rejects_single_annotator():
    verdict = gate_annotations("non_promotional", annotations("yes"), QC)
    assert not verdict.accepted
    assert "insufficient annotators" in verdict.reason


def test_gate_ignores_other_dimensions():
    mixed = annotations("yes", "yes") + annotations("no", "no", dimension="credible_engaging")
    verdict = gate_annotations("non_promotional", mixed, QC)
    assert verdict.accepted and verdict.label == "yes"


def test_distance_identity_is_zero():
    assert compute_distance((39.9, 116.4), (39.9, 116.4)) == 0.0


def test_distance_quarter_circumference():
    assert compute_distance((0.0, 0.0), (0.0, 90.0)) == pytest.approx(10_007_543.398, abs=1.0)


def test_distance_rejects_invalid_coordinates():
    with pytest.raises(DataError, match="invalid coordinates"):
        compute_distance((99.0, 0.0), (0.0, 0.0))


def test_distance_is_symmetric_and_nonnegative():
    a, b = (39.9042, 116.4074), (31.2304, 121.4737)
    assert compute_distance(a, b) == compute_distance(b, a) > 0


def test_sample_distractors_exhaustive_pool():
    assert sorted(sample_distractors("x", ["a", "b", "c"], 3, seed=5)) == ["a", "b", "c"]


def test_sample_distractors_never_picks_correct():
    for seed in range(50):
        picked = sample_distractors("a", ["a", "b", "c", "d", "e"], 3, seed=seed)
        assert "a" not in picked


def test_sample_distractors_pool_too_small():
    with pytest.raises(DataError, match="need 3, have 2"):
        sample_distractors("a", ["b", "c", "a", "b"], 3, seed=1)


def test_shuffle_slot_histogram_is_uniform():
    # Chi-square-style counting check: 1000 seeds, 4 options, each slot 25% +/- 5%.
    counts = [0, 0, 0, 0]
    for seed in range(1000):
        _, index = shuffle_options("correct", ["d1", "d2", "d3"], seed)
        counts[index] += 1
    assert sum(counts) == 1000
    for slot_count in counts:
        assert 200 <= slot_count <= 300, counts
