"""Quality-control gates every generated question must pass.

The trend gate is a seeded bootstrap on the difference of group means with a
fully documented resampling protocol, so an independent reimplementation
reproduces its confidence intervals bit for bit:

* each group g gets its own SplitMix64 stream seeded with
  ``derive_seed(seed, "bootstrap", sha256(",".join(format(v, ".17g"))).hex first 8 bytes)``
  computed over the group's values in order (this ties the stream to the data,
  which makes swapping the two arguments an exact sign flip);
* resample r of group g uses the next ``len(g)`` draws, each reduced modulo
  ``len(g)``, as indices into the group;
* the interval is the linear-interpolation quantile pair at
  ``(1 - ci_level) / 2`` and ``1 - (1 - ci_level) / 2`` over the per-resample
  ``mean(A) - mean(B)`` values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from ..platform_data.records import AnnotationRecord
from ..rng import derive_seed, splitmix_stream


@dataclass(frozen=True)
class QCConfig:
    min_days_per_condition: int = 10
    balance_tolerance: float = 0.2
    min_annotators: int = 2
    bootstrap_resamples: int = 1000
    ci_level: float = 0.95

    PAPER_FLOOR_MIN_DAYS = 10
    PAPER_FLOOR_MIN_ANNOTATORS = 2

    def enforce_strict_floors(self) -> None:
        if self.min_days_per_condition < self.PAPER_FLOOR_MIN_DAYS:
            raise DataError(
                f"qc.min_days_per_condition={self.min_days_per_condition} is below the "
                f"strict-mode floor of {self.PAPER_FLOOR_MIN_DAYS}"
            )
        if self.min_annotators < self.PAPER_FLOOR_MIN_ANNOTATORS:
            raise DataError(
                f"qc.min_annotators={self.min_annotators} is below the strict-mode floor "
                f"of {self.PAPER_FLOOR_MIN_ANNOTATORS}"
            )


@dataclass(frozen=True)
class DaySample:
    """One joined (day, condition) observation: value is that day's volume."""

    condition: str
    value: float
    is_holiday: bool


@dataclass
class QCVerdict:
    passed: bool
    clauses: list[str] = field(default_factory=list)


def check_stat_sufficiency(groups: dict[str, list[DaySample]], qc: QCConfig) -> QCVerdict:
    """Every condition group must have enough days and a comparable holiday mix."""
    clauses: list[str] = []
    for condition in sorted(groups):
        count = len(groups[condition])
        if count < qc.min_days_per_condition:
            clauses.append(f"{condition}: {count} < {qc.min_days_per_condition}")
    shares = {
        condition: (sum(1 for s in samples if s.is_holiday) / len(samples))
        for condition, samples in groups.items()
        if samples
    }
    names = sorted(shares)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            gap = abs(shares[a] - shares[b])
            if gap > qc.balance_tolerance:
                clauses.append(
                    f"holiday balance {a} vs {b}: gap {gap:.2f} > {qc.balance_tolerance:.2f}"
                )
    return QCVerdict(passed=not clauses, clauses=clauses)


@dataclass(frozen=True)
class TrendVerdict:
    direction: str  # A_higher | B_higher | none
    effect: float   # mean(A) - mean(B)
    ci_low: float
    ci_high: float


def _group_stream_seed(seed: int, values: list[float]) -> int:
    digest = hashlib.sha256(",".join(format(v, ".17g") for v in values).encode("ascii")).hexdigest()
    return derive_seed(seed, "bootstrap", digest[:16])


def _resample_means(values: list[float], resamples: int, seed: int) -> np.ndarray:
    n = len(values)
    draws = splitmix_stream(_group_stream_seed(seed, values), resamples * n)
    indices = (draws % np.uint64(n)).reshape(resamples, n).astype(np.intp)
    return np.asarray(values, dtype=np.float64)[indices].mean(axis=1)


def detect_stable_trend(
    group_a: list[float], group_b: list[float], qc: QCConfig, seed: int
) -> TrendVerdict:
    """Bootstrap CI on mean(A) - mean(B); a direction is called only when the
    interval excludes zero.  Swapping the groups flips the direction exactly."""
    if not group_a or not group_b:
        raise DataError("trend detection needs two non-empty groups")
    means_a = _resample_means([float(v) for v in group_a], qc.bootstrap_resamples, seed)
    means_b = _resample_means([float(v) for v in group_b], qc.bootstrap_resamples, seed)
    diffs = means_a - means_b
    alpha = (1.0 - qc.ci_level) / 2.0
    ci_low = float(np.quantile(diffs, alpha))
    ci_high = float(np.quantile(diffs, 1.0 - alpha))
    effect = float(np.mean(np.asarray(group_a, dtype=np.float64))
                   - np.mean(np.asarray(group_b, dtype=np.float64)))
    if ci_low > 0:
        direction = "A_higher"
    elif ci_high < 0:
        direction = "B_higher"
    else:
        direction = "none"
    return TrendVerdict(direction=direction, effect=effect, ci_low=ci_low, ci_high=ci_high)


@dataclass(frozen=True)
class AnnotationVerdict:
    accepted: bool
    label: str | None
    reason: str


def gate_annotations(
    dimension: str, annotations: tuple[AnnotationRecord, ...] | list[AnnotationRecord], qc: QCConfig
) -> AnnotationVerdict:
    """Unanimity over at least qc.min_annotators annotators on one dimension."""
    relevant = [a for a in annotations if a.dimension == dimension]
    if len(relevant) < qc.min_annotators:
        return AnnotationVerdict(
            accepted=False,
            label=None,
            reason=f"insufficient annotators: {len(relevant)} < {qc.min_annotators}",
        )
    labels = {a.label for a in relevant}
    if len(labels) != 1:
        return AnnotationVerdict(
            accepted=False, label=None, reason=f"no consensus: {sorted(labels)}"
        )
    return AnnotationVerdict(accepted=True, label=relevant[0].label, reason="unanimous")
