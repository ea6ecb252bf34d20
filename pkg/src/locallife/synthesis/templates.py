"""Template agent: LLM-generated question-answer templates and their instantiation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..errors import DataError
from ..gateway import ChatRequest, EndpointConfig, Gateway, Message
from ..ioutil import sha256_text
from ..prompts import agent_prompt, fill
from .fields import FIELDS_BY_KIND, field_text

PLACEHOLDER_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")

AGENT_TEMPERATURE = 0.7
TEMPLATE_MAX_TOKENS = 512


@dataclass(frozen=True)
class FieldCombination:
    kind: str  # merchant | user | interaction
    fields: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in FIELDS_BY_KIND:
            raise DataError(f"unknown entity kind {self.kind!r}")
        if not self.fields:
            raise DataError("a field combination needs at least one field")
        valid = FIELDS_BY_KIND[self.kind]
        unknown = [f for f in self.fields if f not in valid]
        if unknown:
            raise DataError(f"fields {unknown} are not valid for kind {self.kind!r}")

    def describe(self) -> str:
        return f"{self.kind}({', '.join(self.fields)})"


@dataclass(frozen=True)
class TemplateSpec:
    combination: FieldCombination
    instruction_template: str
    output_template: str

    @property
    def template_id(self) -> str:
        return sha256_text(self.instruction_template + "\x1f" + self.output_template)[:12]


@dataclass
class TemplateGenerationResult:
    templates: list[TemplateSpec]
    rejected: int = 0
    rounds: int = 0
    warnings: list[str] = field(default_factory=list)


def _validate_candidate(combination: FieldCombination, instruction: str, output: str) -> str | None:
    """Reason the candidate is invalid, or None if it is acceptable."""
    if not instruction.strip() or not output.strip():
        return "empty template text"
    used = set(PLACEHOLDER_RE.findall(instruction)) | set(PLACEHOLDER_RE.findall(output))
    unknown = used - set(combination.fields)
    if unknown:
        return f"unknown placeholder(s): {sorted(unknown)}"
    missing = set(combination.fields) - used
    if missing:
        return f"missing field(s): {sorted(missing)}"
    return None


def _parse_template_payload(text: str) -> list[tuple[str, str]]:
    """Accept a JSON array or one JSON object per line; ignore anything else."""
    candidates: list[tuple[str, str]] = []

    def take(obj: object) -> None:
        if isinstance(obj, dict) and "instruction" in obj and "output" in obj:
            candidates.append((str(obj["instruction"]), str(obj["output"])))

    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        payload = None
    if isinstance(payload, list):
        for obj in payload:
            take(obj)
        return candidates
    for line in text.splitlines():
        line = line.strip().rstrip(",")
        if line.startswith("{"):
            try:
                take(json.loads(line))
            except json.JSONDecodeError:
                continue
    return candidates


def generate_templates(
    combination: FieldCombination,
    gateway: Gateway,
    endpoint: EndpointConfig,
    seed: int,
    min_templates: int = 10,
    max_rounds: int = 3,
) -> TemplateGenerationResult:
    """Collect at least ``min_templates`` validated templates, retrying invalid output.

    Raises DataError if three rounds produce zero valid templates; a shortfall
    below the floor is returned with a warning instead.
    """
    system, user_template = agent_prompt("synthesis", "template_agent")
    result = TemplateGenerationResult(templates=[])
    seen: set[str] = set()
    for round_no in range(1, max_rounds + 1):
        result.rounds = round_no
        user = fill(
            user_template,
            count=str(min_templates),
            kind=combination.kind,
            fields=", ".join(combination.fields),
        )
        # The batch token salts the prompt so each retry round (and each seed)
        # can draw fresh candidates from a deterministic endpoint.
        user += f"\n\nBatch token: {seed}-{round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=AGENT_TEMPERATURE,
            max_output_tokens=TEMPLATE_MAX_TOKENS,
            request_tag=f"synthesis/template_agent/{combination.kind}",
        )
        response = gateway.complete(request, endpoint)
        for instruction, output in _parse_template_payload(response.text):
            reason = _validate_candidate(combination, instruction, output)
            if reason is not None:
                result.rejected += 1
                result.warnings.append(f"{combination.describe()}: rejected candidate ({reason})")
                continue
            spec = TemplateSpec(combination, instruction, output)
            if spec.template_id in seen:
                continue
            seen.add(spec.template_id)
            result.templates.append(spec)
        if len(result.templates) >= min_templates:
            return result
    if not result.templates:
        raise DataError(
            f"no valid templates for combination {combination.describe()} "
            f"after {max_rounds} round(s)"
        )
    result.warnings.append(
        f"{combination.describe()}: only {len(result.templates)} valid templates "
        f"after {max_rounds} round(s) (floor {min_templates})"
    )
    return result


def instantiate_templates(
    templates: list[TemplateSpec],
    records: list,
    mode: str,
    record_ids: list[str],
) -> tuple[list[dict], list[str]]:
    """Substitute record values into templates; returns (pairs, skip log).

    A (template, record) pairing is skipped when the record lacks a non-empty
    value for any placeholder field.
    """
    pairs: list[dict] = []
    skips: list[str] = []
    for record, record_key in zip(records, record_ids):
        for spec in templates:
            values = {}
            missing = None
            for name in spec.combination.fields:
                value = field_text(spec.combination.kind, record, name)
                if not value:
                    missing = name
                    break
                values[name] = value
            if missing is not None:
                skips.append(f"{record_key}: missing value for {missing!r} ({spec.template_id})")
                continue

            def substitute(text: str) -> str:
                return PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], text)

            pairs.append(
                {
                    "instruction": substitute(spec.instruction_template),
                    "output": substitute(spec.output_template),
                    "provenance": {
                        "mode": mode,
                        "agent": "template",
                        "source_ids": [record_key],
                        "template_id": spec.template_id,
                    },
                }
            )
    return pairs, skips
