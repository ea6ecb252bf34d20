"""Narrative agents (merchant / user / interaction perspectives) and the
question-writing agent that turns narratives into instruction pairs."""

from __future__ import annotations

from dataclasses import dataclass

from ..gateway import ChatRequest, EndpointConfig, Gateway, Message, request_fingerprint
from ..prompts import agent_prompt, fill, render_input_block

NARRATIVE_KINDS = ("merchant", "user", "interaction")
NARRATIVE_MAX_TOKENS = 1024
QUESTION_MAX_TOKENS = 512
AGENT_TEMPERATURE = 0.7

_PROMPT_BY_KIND = {
    "merchant": "merchant_agent",
    "user": "user_agent",
    "interaction": "interaction_agent",
}


@dataclass(frozen=True)
class NarrativeText:
    kind: str
    text: str
    source_ids: tuple[str, ...]
    fingerprint: str


@dataclass(frozen=True)
class Rejection:
    stage: str
    kind: str
    source_ids: tuple[str, ...]
    reason: str
    last_output: str


def _missing_values(text: str, inputs: dict[str, str]) -> list[str]:
    return [value for value in inputs.values() if value and value not in text]


def run_narrative_agent(
    kind: str,
    inputs: dict[str, str],
    source_ids: tuple[str, ...],
    gateway: Gateway,
    endpoint: EndpointConfig,
    max_rounds: int = 3,
) -> NarrativeText | Rejection:
    """One narrative, validated for verbatim inclusion of every input value."""
    system, user_template = agent_prompt("synthesis", _PROMPT_BY_KIND[kind])
    last_output = ""
    for round_no in range(1, max_rounds + 1):
        user = fill(user_template, input_block=render_input_block(inputs))
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=AGENT_TEMPERATURE,
            max_output_tokens=NARRATIVE_MAX_TOKENS,
            request_tag=f"synthesis/{_PROMPT_BY_KIND[kind]}",
        )
        response = gateway.complete(request, endpoint)
        last_output = response.text.strip()
        if last_output and not _missing_values(last_output, inputs):
            return NarrativeText(
                kind=kind,
                text=last_output,
                source_ids=source_ids,
                fingerprint=request_fingerprint(request),
            )
    missing = _missing_values(last_output, inputs)
    return Rejection(
        stage="narrative",
        kind=kind,
        source_ids=source_ids,
        reason=f"output omitted input value(s) after {max_rounds} attempts: {missing[:3]}",
        last_output=last_output,
    )


def generate_instruction(
    narrative: NarrativeText,
    gateway: Gateway,
    endpoint: EndpointConfig,
    mode: str,
    max_rounds: int = 3,
) -> dict | Rejection:
    """Instruction pair whose output is the narrative text, byte for byte."""
    system, user_template = agent_prompt("synthesis", "instruction_agent")
    last_output = ""
    for round_no in range(1, max_rounds + 1):
        user = fill(user_template, narrative=narrative.text)
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=AGENT_TEMPERATURE,
            max_output_tokens=QUESTION_MAX_TOKENS,
            request_tag="synthesis/instruction_agent",
        )
        response = gateway.complete(request, endpoint)
        last_output = response.text.strip()
        if last_output:
            return {
                "instruction": last_output,
                "output": narrative.text,
                "provenance": {
                    "mode": mode,
                    "agent": narrative.kind,
                    "source_ids": list(narrative.source_ids),
                    "narrative_fingerprint": narrative.fingerprint,
                },
            }
    return Rejection(
        stage="instruction",
        kind=narrative.kind,
        source_ids=narrative.source_ids,
        reason=f"empty question after {max_rounds} attempts",
        last_output=last_output,
    )
