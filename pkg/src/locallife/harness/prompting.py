"""Prompt construction for the four evaluation strategies.

Zero-shot prompts carry only the question and the response-format
instruction.  Role-play prepends a system message; chain-of-thought appends a
think-then-answer directive; k-shot prefixes worked examples drawn from a
disjoint exemplar pool of the same task type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..errors import DataError
from ..gateway import ChatRequest, Message
from ..rng import SplitMix64, derive_seed

LETTERS = "ABCDEFGHIJKLMNOPQRST"

STRATEGY_KINDS = ("zero_shot", "role_play", "cot", "k_shot")

ANSWER_MAX_TOKENS = 64
COT_MAX_TOKENS = 1024


@dataclass(frozen=True)
class PromptStrategy:
    kind: str = "zero_shot"
    k: int = 0
    role: str = ""
    exemplar_pool_path: str = ""

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise DataError(f"unknown strategy kind {self.kind!r}; expected one of {STRATEGY_KINDS}")
        if self.kind == "k_shot" and self.k < 1:
            raise DataError("k_shot strategy needs k >= 1")
        if self.kind == "role_play" and not self.role.strip():
            raise DataError("role_play strategy needs non-empty role text")

    def describe(self) -> str:
        return f"{self.k}_shot" if self.kind == "k_shot" else self.kind

    def as_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "k": self.k, "role": self.role}


def options_block(options: list[str]) -> str:
    lines = [f"{LETTERS[i]}. {text}" for i, text in enumerate(options)]
    return "Options:\n" + "\n".join(lines)


def format_instruction(n_options: int) -> str:
    return f"Answer with the letter of the single best option (A-{LETTERS[n_options - 1]})."


def _question_block(question: dict[str, Any]) -> str:
    return f"{question['stem']}\n\n{options_block(question['options'])}"


def select_exemplars(
    question: dict[str, Any],
    pool: list[dict[str, Any]],
    k: int,
    eval_ids: set[str],
    seed: int,
) -> list[dict[str, Any]]:
    """k same-task exemplars, disjoint from the evaluation set; leaks are fatal."""
    overlap = [q["question_id"] for q in pool if q["question_id"] in eval_ids]
    if overlap:
        raise DataError(
            f"exemplar pool overlaps the evaluation set ({len(overlap)} question(s), "
            f"e.g. {overlap[0]!r})"
        )
    same_task = [q for q in pool if q["task_id"] == question["task_id"]]
    if len(same_task) < k:
        raise DataError(
            f"exemplar pool has only {len(same_task)} questions of task "
            f"{question['task_id']!r}, need {k}"
        )
    rng = SplitMix64(derive_seed(seed, "exemplars", question["question_id"]))
    return rng.sample_prefix(same_task, k)


def render_prompt(
    question: dict[str, Any],
    strategy: PromptStrategy,
    exemplars: list[dict[str, Any]] | None = None,
    seed: int = 0,
) -> ChatRequest:
    n = len(question["options"])
    target = f"{_question_block(question)}\n\n{format_instruction(n)}"
    max_tokens = ANSWER_MAX_TOKENS
    messages: list[Message]

    if strategy.kind == "zero_shot":
        messages = [Message("user", target)]
    elif strategy.kind == "role_play":
        messages = [Message("system", strategy.role), Message("user", target)]
    elif strategy.kind == "cot":
        directive = (
            "Think through the question step by step. After your reasoning, finish by "
            "answering with the letter of the single best option "
            f"(A-{LETTERS[n - 1]}) on a final line formatted as 'Answer: <letter>'."
        )
        messages = [Message("user", f"{_question_block(question)}\n\n{directive}")]
        max_tokens = COT_MAX_TOKENS
    else:  # k_shot
        exemplars = exemplars or []
        if len(exemplars) != strategy.k:
            raise DataError(f"k_shot needs exactly {strategy.k} exemplars, got {len(exemplars)}")
        blocks = []
        for index, exemplar in enumerate(exemplars, start=1):
            letter = LETTERS[exemplar["correct_index"]]
            blocks.append(
                f"Example {index}:\n{_question_block(exemplar)}\nAnswer: {letter}"
            )
        body = "\n\n".join(blocks) + f"\n\nNow answer this question.\n{target}"
        messages = [Message("user", body)]

    return ChatRequest(
        messages=tuple(messages),
        temperature=0.0,
        max_output_tokens=max_tokens,
        request_tag=f"eval/{question['question_id']}",
    )
