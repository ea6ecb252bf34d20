"""Arithmetic consistency check for the bundled published score table.

The bundled CSV snapshots the category and overall scores of 30 public
models.  Each row's overall is compared against the task-count-weighted mean
of its four category scores (weights 18/10/10/3, the category sizes).
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path
from typing import Any

from ..errors import DataError

DEFAULT_WEIGHTS = (18, 10, 10, 3)
DEFAULT_TOLERANCE = 0.5

_CATEGORY_FIELDS = (
    "service_fundamentals",
    "service_with_context",
    "user_service_interaction",
    "composite",
)


def load_published_table(path: Path | None = None) -> list[dict[str, Any]]:
    if path is None:
        text = resources.files("locallife.data").joinpath("published_scores.csv").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rows = []
    for raw in csv.DictReader(text.splitlines()):
        try:
            rows.append(
                {
                    "model_type": raw.get("model_type", ""),
                    "model": raw["model"],
                    "categories": [float(raw[field]) for field in _CATEGORY_FIELDS],
                    "overall": float(raw["overall"]),
                    "rank": int(raw["rank"]) if raw.get("rank") else None,
                }
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"published-table row is malformed: {raw} ({exc})") from exc
    if not rows:
        raise DataError("published table has no rows")
    return rows


def verify_published_table(
    rows: list[dict[str, Any]],
    weights: tuple[int, int, int, int] = DEFAULT_WEIGHTS,
    tolerance: float = DEFAULT_TOLERANCE,
) -> dict[str, Any]:
    total_weight = sum(weights)
    verdicts = []
    worst: dict[str, Any] | None = None
    for row in rows:
        weighted = sum(c * w for c, w in zip(row["categories"], weights)) / total_weight
        deviation = abs(weighted - row["overall"])
        verdict = {
            "model": row["model"],
            "published_overall": row["overall"],
            "weighted_mean": round(weighted, 4),
            "deviation": round(deviation, 4),
            "passed": deviation <= tolerance,
        }
        verdicts.append(verdict)
        if worst is None or verdict["deviation"] > worst["deviation"]:
            worst = verdict
    return {
        "weights": list(weights),
        "tolerance": tolerance,
        "rows": verdicts,
        "all_passed": all(v["passed"] for v in verdicts),
        "worst": worst,
    }
