"""Pearson correlation and cross-run correlation analysis."""

from __future__ import annotations

import math
from typing import Any

from ..errors import DataError
from ..benchmark.registry import CATEGORIES
from .scoring import ScoreTable


def pearson(x: list[float], y: list[float]) -> float:
    if len(x) != len(y):
        raise DataError(f"pearson needs equal-length vectors, got {len(x)} and {len(y)}")
    if len(x) < 2:
        raise DataError("pearson needs at least two points")
    if len(set(x)) == 1 or len(set(y)) == 1:
        raise DataError("correlation undefined for a constant vector")
    mean_x = sum(x) / len(x)
    mean_y = sum(y) / len(y)
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    ss_x = sum(v * v for v in dx)
    ss_y = sum(v * v for v in dy)
    if ss_x == 0.0 or ss_y == 0.0:
        raise DataError("correlation undefined for a constant vector")
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(ss_x * ss_y)
    return max(-1.0, min(1.0, r))


def _matrix(names: list[str], vectors: dict[str, list[float]]) -> list[list[float]]:
    matrix = [[1.0] * len(names) for _ in names]
    for i, a in enumerate(names):
        for j in range(i + 1, len(names)):
            r = pearson(vectors[a], vectors[names[j]])
            matrix[i][j] = r
            matrix[j][i] = r
    return matrix


def _offdiagonal_stats(matrix: list[list[float]]) -> dict[str, float]:
    values = [
        matrix[i][j] for i in range(len(matrix)) for j in range(i + 1, len(matrix))
    ]
    if not values:
        return {"mean": 0.0, "sd": 0.0, "count": 0}
    mean = sum(values) / len(values)
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
    return {"mean": mean, "sd": sd, "count": len(values)}


def correlation_analysis(tables: list[ScoreTable]) -> dict[str, Any]:
    """Task-pair and category-pair Pearson matrices over at least three runs.

    Tasks whose accuracy is constant across the runs have undefined
    correlation; they are excluded and listed.
    """
    if len(tables) < 3:
        raise DataError(f"correlation analysis needs at least 3 runs, got {len(tables)}")
    versions = {t.benchmark_version for t in tables}
    if len(versions) != 1:
        raise DataError(f"runs span multiple benchmark versions: {sorted(versions)}")

    shared_tasks = sorted(set.intersection(*(set(t.per_task) for t in tables)))
    vectors = {task: [t.per_task[task] for t in tables] for task in shared_tasks}
    excluded = [task for task in shared_tasks if len(set(vectors[task])) == 1]
    included = [task for task in shared_tasks if task not in excluded]
    task_matrix = _matrix(included, vectors)

    category_vectors = {
        c: [t.per_category.get(c, 0.0) for t in tables]
        for c in CATEGORIES
        if all(c in t.per_category for t in tables)
    }
    excluded_categories = [
        c for c, vec in category_vectors.items() if len(set(vec)) == 1
    ]
    included_categories = [c for c in category_vectors if c not in excluded_categories]
    category_matrix = _matrix(included_categories, category_vectors)

    return {
        "runs": [t.endpoint_id for t in tables],
        "benchmark_version": tables[0].benchmark_version,
        "tasks": included,
        "excluded_constant_tasks": excluded,
        "task_matrix": task_matrix,
        "task_stats": _offdiagonal_stats(task_matrix),
        "categories": included_categories,
        "excluded_constant_categories": excluded_categories,
        "category_matrix": category_matrix,
        "category_stats": _offdiagonal_stats(category_matrix),
    }
