"""Driving the 41 generators, applying the option shuffle, and writing the
versioned benchmark file."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Callable

from ..errors import DataError, InternalError
from ..ioutil import canonical_dumps, read_json, sha256_text, write_json
from ..platform_data import StoreBundle
from ..rng import derive_seed
from . import gen_composite, gen_context, gen_fundamentals, gen_interaction
from .distractors import shuffle_options
from .qc import QCConfig
from .questions import BenchmarkQuestion, GenContext, question_from_dict
from .registry import CATEGORIES, TASKS, check_registry, task

Generator = Callable[[GenContext, QCConfig, int, int], tuple[list[dict], list[str]]]

GENERATORS: dict[str, Generator] = {
    "category_prediction": gen_fundamentals.gen_category_prediction,
    "attribute_mining": gen_fundamentals.gen_attribute_mining,
    "attribute_value_extraction": gen_fundamentals.gen_attribute_value_extraction,
    "multilevel_category_prediction": gen_fundamentals.gen_multilevel_category_prediction,
    "category_merchant_selection": gen_fundamentals.gen_category_merchant_selection,
    "attribute_category_selection": gen_fundamentals.gen_attribute_category_selection,
    "same_category_judgment": gen_fundamentals.gen_same_category_judgment,
    "same_category_selection": gen_fundamentals.gen_same_category_selection,
    "attribute_value_reasonableness": gen_fundamentals.gen_attribute_value_reasonableness,
    "attribute_value_identification": gen_fundamentals.gen_attribute_value_identification,
    "attribute_value_synonym": gen_fundamentals.gen_attribute_value_synonym,
    "attribute_value_containment": gen_fundamentals.gen_attribute_value_containment,
    "attribute_compatibility": gen_fundamentals.gen_attribute_compatibility,
    "mathematical_operations": gen_fundamentals.gen_mathematical_operations,
    "function_tag_prediction": gen_fundamentals.gen_function_tag_prediction,
    "brand_positioning": gen_fundamentals.gen_brand_positioning,
    "brand_similarity": gen_fundamentals.gen_brand_similarity,
    "category_complementarity": gen_fundamentals.gen_category_complementarity,
    "weather_impact_qualitative": gen_context.gen_weather_impact_qualitative,
    "weather_impact_quantitative": gen_context.gen_weather_impact_quantitative,
    "seasonal_impact_qualitative": gen_context.gen_seasonal_impact_qualitative,
    "seasonal_impact_quantitative": gen_context.gen_seasonal_impact_quantitative,
    "nearest_merchant_selection": gen_context.gen_nearest_merchant_selection,
    "distance_estimation": gen_context.gen_distance_estimation,
    "administrative_division": gen_context.gen_administrative_division,
    "business_district_identification": gen_context.gen_business_district_identification,
    "operating_hours_prediction": gen_context.gen_operating_hours_prediction,
    "peak_hours_prediction": gen_context.gen_peak_hours_prediction,
    "target_group_identification": gen_interaction.gen_target_group_identification,
    "user_preference_prediction": gen_interaction.gen_user_preference_prediction,
    "review_information_points": gen_interaction.gen_review_information_points,
    "review_guidance_value": gen_interaction.gen_review_guidance_value,
    "review_colloquialism": gen_interaction.gen_review_colloquialism,
    "review_real_examples": gen_interaction.gen_review_real_examples,
    "review_language_appeal": gen_interaction.gen_review_language_appeal,
    "non_marketing_content": gen_interaction.gen_non_marketing_content,
    "human_written_content": gen_interaction.gen_human_written_content,
    "overall_review_usefulness": gen_interaction.gen_overall_review_usefulness,
    "recommendation": gen_composite.gen_recommendation,
    "search": gen_composite.gen_search,
    "content_marketing": gen_composite.gen_content_marketing,
}


def build_task_questions(
    task_id: str,
    bundle: StoreBundle | GenContext,
    qc: QCConfig,
    n: int,
    seed: int,
) -> tuple[list[BenchmarkQuestion], list[str]]:
    """Up to ``n`` gated questions for one task, with shortfall notes."""
    if n < 1:
        raise DataError(f"question count must be >= 1, got {n}")
    spec = task(task_id)
    generator = GENERATORS[task_id]
    ctx = bundle if isinstance(bundle, GenContext) else GenContext(bundle)
    drafts, notes = generator(ctx, qc, n, seed)
    questions = []
    for index, draft in enumerate(drafts):
        expected = spec.option_count - 1
        if len(draft["distractors"]) != expected:
            raise InternalError(
                f"{task_id} draft {index} has {len(draft['distractors'])} distractors, "
                f"expected {expected}"
            )
        questions.append(
            BenchmarkQuestion(
                question_id=f"{task_id}-{index:04d}",
                task_id=task_id,
                stem=draft["stem"],
                options=(draft["correct"], *draft["distractors"]),
                correct_index=0,
                construction={
                    "source_ids": draft["source_ids"],
                    "evidence": draft["evidence"],
                    "seed": seed,
                },
            )
        )
    return questions, notes


def build_all_tasks(
    bundle: StoreBundle,
    qc: QCConfig,
    per_task: int,
    seed: int,
) -> tuple[list[BenchmarkQuestion], dict[str, list[str]]]:
    check_registry()
    ctx = GenContext(bundle)
    questions: list[BenchmarkQuestion] = []
    shortfalls: dict[str, list[str]] = {}
    for spec in TASKS:
        built, notes = build_task_questions(spec.id, ctx, qc, per_task, seed)
        questions.extend(built)
        if notes:
            shortfalls[spec.id] = notes
    return questions, shortfalls


def assemble_benchmark(
    questions: list[BenchmarkQuestion],
    city: str,
    seed: int,
    qc: QCConfig,
    store_hash: str = "",
) -> dict[str, Any]:
    """Shuffle options, validate every question, and produce the benchmark file body."""
    shuffled: list[BenchmarkQuestion] = []
    for question in questions:
        correct_text = question.options[question.correct_index]
        distractors = [o for i, o in enumerate(question.options) if i != question.correct_index]
        options, correct_index = shuffle_options(
            correct_text, distractors, derive_seed(seed, "shuffle", question.question_id)
        )
        shuffled.append(
            BenchmarkQuestion(
                question_id=question.question_id,
                task_id=question.task_id,
                stem=question.stem,
                options=tuple(options),
                correct_index=correct_index,
                construction=question.construction,
            )
        )
    problems = []
    for question in shuffled:
        problems.extend(question.validate())
    if problems:
        raise InternalError(
            f"benchmark assembly found {len(problems)} invalid question(s): "
            + "; ".join(problems[:5])
        )

    by_category: dict[str, int] = {c: 0 for c in CATEGORIES}
    by_task: dict[str, int] = {}
    for question in shuffled:
        by_category[question.category] += 1
        by_task[question.task_id] = by_task.get(question.task_id, 0) + 1

    body_questions = [q.as_dict() for q in shuffled]
    version = "bench-" + sha256_text(
        canonical_dumps({"city": city, "seed": seed, "questions": body_questions})
    )[:12]
    return {
        "version": version,
        "city": city,
        "counts": {"total": len(shuffled), "by_category": by_category, "by_task": by_task},
        "manifest": {
            "seed": seed,
            "qc": {
                "min_days_per_condition": qc.min_days_per_condition,
                "balance_tolerance": qc.balance_tolerance,
                "min_annotators": qc.min_annotators,
                "bootstrap_resamples": qc.bootstrap_resamples,
                "ci_level": qc.ci_level,
            },
            "store_hash": store_hash,
        },
        "questions": body_questions,
    }


def validate_benchmark_body(body: dict[str, Any]) -> list[BenchmarkQuestion]:
    """Schema-check a benchmark file body; returns the parsed questions."""
    questions = [question_from_dict(raw) for raw in body.get("questions", [])]
    problems = []
    for question in questions:
        problems.extend(question.validate())
    counts = body.get("counts", {})
    if counts.get("total") != len(questions):
        problems.append(f"header total {counts.get('total')} != {len(questions)} questions")
    by_category: dict[str, int] = {c: 0 for c in CATEGORIES}
    for question in questions:
        by_category[question.category] += 1
    if counts.get("by_category") != by_category:
        problems.append("header category counts do not match questions")
    if problems:
        raise DataError(
            f"benchmark file failed validation ({len(problems)} problem(s)): "
            + "; ".join(problems[:5])
        )
    return questions


def write_benchmark(body: dict[str, Any], path: Path) -> None:
    validate_benchmark_body(body)
    write_json(path, body)


def read_benchmark(path: Path) -> dict[str, Any]:
    body = read_json(path)
    validate_benchmark_body(body)
    return body
