"""Model evaluation runs: one answer per benchmark question, persisted with
full provenance and reproducible under mock endpoints."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from ..errors import DataError
from ..gateway import EndpointConfig, Gateway
from ..ioutil import read_json, write_json
from .parsing import parse_answer
from .prompting import PromptStrategy, render_prompt, select_exemplars

DEGRADED_FAILURE_SHARE = 0.2

# Mock runs use a fixed clock so identical inputs yield byte-identical files.
MOCK_TIMESTAMP = "1970-01-01T00:00:00Z"


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def evaluate_model(
    benchmark: dict[str, Any],
    endpoint: EndpointConfig,
    strategy: PromptStrategy,
    gateway: Gateway,
    max_parallel: int | None = None,
    seed: int = 0,
    exemplar_pool: list[dict[str, Any]] | None = None,
) -> dict[str, Any]:
    questions = benchmark["questions"]
    if not questions:
        raise DataError("benchmark contains no questions")
    eval_ids = {q["question_id"] for q in questions}

    requests = []
    for question in questions:
        exemplars = None
        if strategy.kind == "k_shot":
            if not exemplar_pool:
                raise DataError("k_shot evaluation needs an exemplar pool")
            exemplars = select_exemplars(question, exemplar_pool, strategy.k, eval_ids, seed)
        requests.append(render_prompt(question, strategy, exemplars, seed))

    started = MOCK_TIMESTAMP if endpoint.kind == "mock" else _now()
    result = gateway.complete_batch(requests, endpoint, max_parallel)
    finished = MOCK_TIMESTAMP if endpoint.kind == "mock" else _now()

    answers = []
    for index, question in enumerate(questions):
        response = result.responses[index]
        if response is None:
            answers.append(
                {
                    "question_id": question["question_id"],
                    "raw_text": "",
                    "parsed": None,
                    "correct": False,
                    "latency_ms": 0.0,
                    "error": result.errors.get(index, "transport failure"),
                }
            )
            continue
        parsed = parse_answer(response.text, len(question["options"]), question["options"])
        answers.append(
            {
                "question_id": question["question_id"],
                "raw_text": response.text,
                "parsed": parsed,
                "correct": parsed == question["correct_index"],
                "latency_ms": response.latency_ms,
            }
        )

    failures = len(result.errors)
    return {
        "endpoint_id": endpoint.endpoint_id,
        "benchmark_version": benchmark["version"],
        "strategy": strategy.as_dict(),
        "seed": seed,
        "started": started,
        "finished": finished,
        "transport_failures": failures,
        "degraded": failures > DEGRADED_FAILURE_SHARE * len(questions),
        "unparsed": sum(1 for a in answers if a["parsed"] is None),
        "answers": answers,
    }


def write_run(run: dict[str, Any], path: Path) -> None:
    write_json(path, run)


def read_run(path: Path) -> dict[str, Any]:
    run = read_json(path)
    for key in ("endpoint_id", "benchmark_version", "strategy", "answers"):
        if key not in run:
            raise DataError(f"run file {path} is missing {key!r}")
    return run
