"""The three composite-task agent workflows, trace capture, and conversion of
traces into training pairs (the data-flywheel path)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import DataError, EndpointError, InternalError
from ..gateway import ChatRequest, EndpointConfig, Gateway, Message, request_fingerprint
from ..harness.parsing import parse_answer
from ..harness.prompting import LETTERS, options_block
from ..platform_data import StoreBundle
from ..prompts import fill, workflow_catalog

WORKFLOW_IDS = ("recommendation", "search", "content_marketing")

# Canonical step orders; the prompt catalog must agree with these.
WORKFLOW_STEPS: dict[str, tuple[str, ...]] = {
    "recommendation": (
        "similar_profile_patterns",
        "behavior_sequence_preferences",
        "context_adjustment",
        "prediction",
    ),
    "search": (
        "similar_profile_patterns",
        "query_intent_analysis",
        "context_adjustment",
        "click_prediction",
    ),
    "content_marketing": (
        "similar_profile_preferences",
        "topic_sentiment_parsing",
        "quality_evaluation",
        "final_choice",
    ),
}

STEP_MAX_TOKENS = 1024
MIN_SHARED_PROFILE_ATTRS = 2


@dataclass(frozen=True)
class WorkflowSpec:
    workflow_id: str
    step_names: tuple[str, ...]
    prompts: dict[str, str]


@dataclass
class WorkflowTrace:
    workflow_id: str
    question_id: str
    steps: list[dict[str, str]] = field(default_factory=list)
    prediction: int | None = None
    total_tokens: int = 0
    error: str | None = None

    @property
    def truncated(self) -> bool:
        return self.error is not None

    def as_dict(self) -> dict[str, Any]:
        return {
            "workflow_id": self.workflow_id,
            "question_id": self.question_id,
            "steps": self.steps,
            "prediction": self.prediction,
            "total_tokens": self.total_tokens,
            "error": self.error,
        }


def workflow_spec(workflow_id: str) -> WorkflowSpec:
    if workflow_id not in WORKFLOW_IDS:
        raise DataError(f"unknown workflow {workflow_id!r}; expected one of {WORKFLOW_IDS}")
    step_names, prompts = workflow_catalog(workflow_id)
    if tuple(step_names) != WORKFLOW_STEPS[workflow_id]:
        raise InternalError(
            f"prompt catalog step order for {workflow_id!r} diverged: {step_names}"
        )
    missing = [name for name in step_names if name not in prompts]
    if missing:
        raise InternalError(f"prompt catalog missing step prompt(s) {missing} for {workflow_id!r}")
    return WorkflowSpec(workflow_id, tuple(step_names), prompts)


def similar_profile_summary(
    bundle: StoreBundle, user_id: str, min_shared: int = MIN_SHARED_PROFILE_ATTRS
) -> str:
    """Aggregate order counts by category for users sharing profile attributes."""
    target = bundle.user(user_id)
    if target is None:
        return "No aggregate statistics available."
    peers = []
    for user in bundle.users:
        if user.user_id == user_id:
            continue
        shared = sum(
            1 for key, value in target.profile.items() if user.profile.get(key) == value
        )
        if shared >= min_shared:
            peers.append(user.user_id)
    if not peers:
        return "No users share enough profile attributes."
    counts: dict[str, int] = {}
    peer_set = set(peers)
    for interaction in bundle.interactions:
        if interaction.action == "order" and interaction.user_id in peer_set:
            merchant = bundle.merchant(interaction.merchant_id)
            if merchant is not None:
                leaf = merchant.leaf_category()
                counts[leaf] = counts.get(leaf, 0) + 1
    if not counts:
        return f"{len(peers)} similar users, but no recorded orders."
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
    rendered = "; ".join(f"{leaf}: {count} orders" for leaf, count in top)
    return f"{len(peers)} users share >= {min_shared} profile attributes. Top categories: {rendered}."


def run_workflow(
    workflow_id: str,
    question: dict[str, Any],
    gateway: Gateway,
    endpoint: EndpointConfig,
    bundle: StoreBundle | None = None,
) -> tuple[int | None, WorkflowTrace]:
    """Execute the workflow's steps in order; exactly one LLM call per step.

    Each step prompt embeds the question plus all prior step responses; the
    prediction is parsed from the final step only.  A failed step truncates
    the trace and yields an Unparsed prediction.
    """
    spec = workflow_spec(workflow_id)
    if question["task_id"] != workflow_id:
        raise DataError(
            f"question {question['question_id']!r} is a {question['task_id']!r} task, "
            f"not {workflow_id!r}"
        )
    similar = "No aggregate statistics available."
    if bundle is not None:
        source_ids = question.get("construction", {}).get("source_ids", [])
        if source_ids:
            similar = similar_profile_summary(bundle, source_ids[0])

    trace = WorkflowTrace(workflow_id=workflow_id, question_id=question["question_id"])
    opts = options_block(list(question["options"]))
    prior: list[tuple[str, str]] = []
    for step_name in spec.step_names:
        prior_text = "\n".join(f"[{name}] {text}" for name, text in prior) or "(none yet)"
        user = fill(
            spec.prompts[step_name],
            stem=question["stem"],
            options_block=opts,
            similar_profiles=similar,
            prior_steps=prior_text,
        )
        request = ChatRequest(
            messages=(Message("user", user),),
            temperature=0.0,
            max_output_tokens=STEP_MAX_TOKENS,
            request_tag=f"workflow/{workflow_id}/{step_name}",
        )
        try:
            response = gateway.complete(request, endpoint)
        except EndpointError as exc:
            trace.steps.append(
                {
                    "name": step_name,
                    "prompt_fingerprint": request_fingerprint(request),
                    "response": "",
                    "error": str(exc),
                }
            )
            trace.error = f"step {step_name!r} failed: {exc}"
            trace.prediction = None
            return None, trace
        trace.steps.append(
            {
                "name": step_name,
                "prompt_fingerprint": request_fingerprint(request),
                "response": response.text,
            }
        )
        trace.total_tokens += response.prompt_tokens + response.completion_tokens
        prior.append((step_name, response.text))

    trace.prediction = parse_answer(
        trace.steps[-1]["response"], len(question["options"]), list(question["options"])
    )
    return trace.prediction, trace


def trace_to_instruction(
    trace: WorkflowTrace | dict[str, Any],
    question: dict[str, Any],
    include_incorrect: bool = False,
) -> dict[str, Any] | None:
    """Training pair from a complete trace; wrong predictions are dropped by
    default.  Returns None when the trace is excluded by that filter."""
    data = trace.as_dict() if isinstance(trace, WorkflowTrace) else trace
    if data.get("error"):
        raise DataError(f"cannot convert truncated trace for {data.get('question_id')!r}")
    prediction = data.get("prediction")
    if prediction is None:
        raise DataError(f"trace for {data.get('question_id')!r} has no parseable prediction")
    if not include_incorrect and prediction != question["correct_index"]:
        return None
    expected_steps = WORKFLOW_STEPS[data["workflow_id"]]
    names = tuple(step["name"] for step in data["steps"])
    if names != expected_steps:
        raise InternalError(f"trace steps {names} do not match spec {expected_steps}")
    reasoning = "\n\n".join(f"[{step['name']}] {step['response']}" for step in data["steps"])
    output = f"{reasoning}\n\nAnswer: {LETTERS[prediction]}"
    instruction = f"{question['stem']}\n\n{options_block(list(question['options']))}"
    return {
        "instruction": instruction,
        "output": output,
        "provenance": {
            "mode": "flywheel",
            "agent": data["workflow_id"],
            "source_ids": [data["question_id"]],
            "step_fingerprints": [step["prompt_fingerprint"] for step in data["steps"]],
        },
    }
