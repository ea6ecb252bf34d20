"""Accuracy scoring and ranking.

A task's score is plain accuracy (percent).  A category's score is the
unweighted mean of its tasks' accuracies, and the overall score is the
unweighted mean over all tasks, which equals the task-count-weighted mean of
the category scores; both aggregations are computed and cross-checked.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any

from ..errors import DataError, InternalError
from ..benchmark.registry import CATEGORIES, CATEGORY_LABELS, TASKS_BY_ID

CATEGORY_COLUMNS = (
    "service_fundamentals",
    "service_with_context",
    "user_service_interaction",
    "composite",
)


@dataclass
class ScoreTable:
    endpoint_id: str
    benchmark_version: str
    strategy: str
    per_task: dict[str, float]
    per_category: dict[str, float]
    overall: float
    question_counts: dict[str, int] = field(default_factory=dict)
    rank: int | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "endpoint_id": self.endpoint_id,
            "benchmark_version": self.benchmark_version,
            "strategy": self.strategy,
            "per_task": dict(sorted(self.per_task.items())),
            "per_category": {c: self.per_category[c] for c in CATEGORIES if c in self.per_category},
            "overall": self.overall,
            "question_counts": dict(sorted(self.question_counts.items())),
            "rank": self.rank,
        }


def score_table_from_dict(raw: dict[str, Any]) -> ScoreTable:
    return ScoreTable(
        endpoint_id=raw["endpoint_id"],
        benchmark_version=raw["benchmark_version"],
        strategy=raw.get("strategy", "zero_shot"),
        per_task={k: float(v) for k, v in raw["per_task"].items()},
        per_category={k: float(v) for k, v in raw["per_category"].items()},
        overall=float(raw["overall"]),
        question_counts={k: int(v) for k, v in raw.get("question_counts", {}).items()},
        rank=raw.get("rank"),
    )


def score_run(run: dict[str, Any], benchmark: dict[str, Any]) -> ScoreTable:
    if run["benchmark_version"] != benchmark["version"]:
        raise DataError(
            f"run was made against benchmark {run['benchmark_version']!r}, "
            f"not {benchmark['version']!r}"
        )
    questions = {q["question_id"]: q for q in benchmark["questions"]}
    answers = run["answers"]
    if len(answers) != len(questions):
        raise DataError(f"run has {len(answers)} answers for {len(questions)} questions")

    correct_by_task: dict[str, int] = {}
    total_by_task: dict[str, int] = {}
    for answer in answers:
        question = questions.get(answer["question_id"])
        if question is None:
            raise DataError(f"answer references unknown question {answer['question_id']!r}")
        task_id = question["task_id"]
        total_by_task[task_id] = total_by_task.get(task_id, 0) + 1
        if answer["correct"]:
            correct_by_task[task_id] = correct_by_task.get(task_id, 0) + 1

    per_task = {
        task_id: 100.0 * correct_by_task.get(task_id, 0) / total
        for task_id, total in total_by_task.items()
    }
    per_category: dict[str, float] = {}
    tasks_per_category: dict[str, list[str]] = {}
    for task_id in per_task:
        category = TASKS_BY_ID[task_id].category
        tasks_per_category.setdefault(category, []).append(task_id)
    for category, task_ids in tasks_per_category.items():
        per_category[category] = sum(per_task[t] for t in task_ids) / len(task_ids)

    overall = sum(per_task.values()) / len(per_task)
    weighted = sum(
        per_category[c] * len(task_ids) for c, task_ids in tasks_per_category.items()
    ) / sum(len(task_ids) for task_ids in tasks_per_category.values())
    if abs(overall - weighted) > 1e-9:
        raise InternalError(
            f"aggregation mismatch: mean-over-tasks {overall!r} vs weighted categories {weighted!r}"
        )

    strategy = run.get("strategy", {})
    strategy_name = strategy.get("kind", "zero_shot")
    if strategy_name == "k_shot":
        strategy_name = f"{strategy.get('k', 0)}_shot"
    return ScoreTable(
        endpoint_id=run["endpoint_id"],
        benchmark_version=run["benchmark_version"],
        strategy=strategy_name,
        per_task=per_task,
        per_category=per_category,
        overall=overall,
        question_counts=dict(total_by_task),
    )


def rank_runs(tables: list[ScoreTable]) -> list[ScoreTable]:
    """Order by overall descending; ties break on category scores then endpoint id."""

    def sort_key(table: ScoreTable):
        return (
            -table.overall,
            tuple(-table.per_category.get(c, 0.0) for c in CATEGORIES),
            table.endpoint_id,
        )

    ordered = sorted(tables, key=sort_key)
    for position, table in enumerate(ordered, start=1):
        table.rank = position
    return ordered


def render_report(tables: list[ScoreTable], fmt: str = "markdown") -> str:
    if not tables:
        raise DataError("report needs at least one score table")
    ordered = rank_runs(list(tables))
    if fmt == "markdown":
        return _render_markdown(ordered)
    if fmt == "csv":
        return _render_csv(ordered)
    raise DataError(f"unknown report format {fmt!r}; expected markdown or csv")


def _render_markdown(tables: list[ScoreTable]) -> str:
    headers = ["Model", *(CATEGORY_LABELS[c] for c in CATEGORIES), "Overall", "Rank"]
    lines = ["| " + " | ".join(headers) + " |",
             "|" + "|".join("---" for _ in headers) + "|"]
    for table in tables:
        cells = [table.endpoint_id]
        cells.extend(f"{table.per_category.get(c, 0.0):.2f}" for c in CATEGORIES)
        cells.append(f"{table.overall:.2f}")
        cells.append(str(table.rank))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _render_csv(tables: list[ScoreTable]) -> str:
    task_ids = sorted({t for table in tables for t in table.per_task})
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["endpoint_id", "benchmark_version", "strategy", *CATEGORY_COLUMNS, "overall", "rank",
         *[f"task:{t}" for t in task_ids]]
    )
    for table in tables:
        writer.writerow(
            [
                table.endpoint_id,
                table.benchmark_version,
                table.strategy,
                *[repr(table.per_category.get(c, 0.0)) for c in CATEGORIES],
                repr(table.overall),
                table.rank,
                *[repr(table.per_task[t]) if t in table.per_task else "" for t in task_ids],
            ]
        )
    return buffer.getvalue()


def parse_report_csv(text: str) -> list[ScoreTable]:
    reader = csv.DictReader(io.StringIO(text))
    tables = []
    for row in reader:
        per_task = {
            key[len("task:"):]: float(value)
            for key, value in row.items()
            if key.startswith("task:") and value
        }
        per_category = {
            c: float(row[col]) for c, col in zip(CATEGORIES, CATEGORY_COLUMNS) if row.get(col)
        }
        tables.append(
            ScoreTable(
                endpoint_id=row["endpoint_id"],
                benchmark_version=row["benchmark_version"],
                strategy=row["strategy"],
                per_task=per_task,
                per_category=per_category,
                overall=float(row["overall"]),
                rank=int(row["rank"]) if row.get("rank") else None,
            )
        )
    return tables
