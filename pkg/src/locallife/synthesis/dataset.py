"""Dataset-level synthesis: the full multi-agent pipeline plus the two
baseline modes, and export to the instruction/output training file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import DataError
from ..gateway import ChatRequest, EndpointConfig, Gateway, Message
from ..ioutil import canonical_dumps, sha256_text, write_json
from ..platform_data import StoreBundle, export_record, sample_entities
from ..prompts import agent_prompt, fill
from ..rng import derive_seed
from .fields import hours_text, profile_text, timestamp_text
from .narrative import Rejection, generate_instruction, run_narrative_agent
from .templates import (
    PLACEHOLDER_RE,
    FieldCombination,
    generate_templates,
    instantiate_templates,
)

MODES = ("multi_agent", "template_only", "single_llm")

DEFAULT_COMBINATIONS = (
    FieldCombination("merchant", ("name", "introduction", "category_path")),
    FieldCombination("merchant", ("name", "category_path")),
    FieldCombination("merchant", ("name", "introduction")),
    FieldCombination("user", ("profile", "city")),
)

# Reference fine-tuning settings recorded alongside every exported dataset for
# downstream trainers that mask loss to the output tokens.
REFERENCE_HYPERPARAMETERS = {
    "learning_rate": "6e-6",
    "per_device_batch_size": 4,
    "gradient_accumulation_steps": 4,
    "epochs": 2,
    "lr_schedule": "cosine",
    "loss_on": "output_tokens_only",
}


@dataclass(frozen=True)
class SynthesisBudget:
    n_merchants: int
    n_users: int
    n_interactions: int
    target_pairs: int | None = None


@dataclass
class SynthesisReport:
    mode: str
    seed: int
    budget: dict[str, Any]
    pairs_by_agent: dict[str, int] = field(default_factory=dict)
    rejections: list[dict[str, Any]] = field(default_factory=list)
    skips: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    emitted: int = 0
    truncated: int = 0

    def count_pair(self, agent: str) -> None:
        self.pairs_by_agent[agent] = self.pairs_by_agent.get(agent, 0) + 1

    def reject(self, rejection: Rejection) -> None:
        self.rejections.append(
            {
                "stage": rejection.stage,
                "kind": rejection.kind,
                "source_ids": list(rejection.source_ids),
                "reason": rejection.reason,
                "last_output": rejection.last_output,
            }
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "budget": self.budget,
            "pairs_by_agent": dict(sorted(self.pairs_by_agent.items())),
            "rejection_count": len(self.rejections),
            "rejections": self.rejections,
            "skips": self.skips,
            "warnings": self.warnings,
            "emitted": self.emitted,
            "truncated": self.truncated,
        }


def _record_key(kind: str, record, index: int) -> str:
    if kind == "merchant":
        return record.merchant_id
    if kind == "user":
        return record.user_id
    return f"interaction:{index}"


def _sampled(bundle: StoreBundle, budget: SynthesisBudget, seed: int):
    merchants = sample_entities(bundle.merchants, budget.n_merchants, derive_seed(seed, "synthesis", "merchants"))
    users = sample_entities(bundle.users, budget.n_users, derive_seed(seed, "synthesis", "users"))
    interactions = sample_entities(
        bundle.interactions, budget.n_interactions, derive_seed(seed, "synthesis", "interactions")
    )
    return merchants, users, interactions


def _weather_on(bundle: StoreBundle, city: str, date: str) -> str:
    for day in bundle.calendar:
        if day.city == city and day.date == date:
            return day.weather
    return "unknown"


def _first_interaction_of(bundle: StoreBundle, user_id: str):
    chosen = None
    for rec in bundle.interactions:
        if rec.user_id != user_id:
            continue
        key = (rec.timestamp, rec.merchant_id)
        if chosen is None or key < (chosen.timestamp, chosen.merchant_id):
            chosen = rec
    return chosen


def _template_phase(mode, bundle, merchants, users, gateway, endpoint, seed, report,
                    combinations) -> list[dict]:
    pairs: list[dict] = []
    records_by_kind = {
        "merchant": (merchants, [m.merchant_id for m in merchants]),
        "user": (users, [u.user_id for u in users]),
        "interaction": ([], []),
    }
    for combo_no, combination in enumerate(combinations):
        records, ids = records_by_kind[combination.kind]
        if not records:
            continue
        result = generate_templates(
            combination, gateway, endpoint, derive_seed(seed, "templates", str(combo_no))
        )
        report.warnings.extend(result.warnings)
        made, skips = instantiate_templates(result.templates, records, mode, ids)
        report.skips.extend(skips)
        for pair in made:
            report.count_pair("template")
        pairs.extend(made)
    return pairs


def _narrative_phase(mode, bundle, merchants, users, interactions, gateway, endpoint,
                     report) -> list[dict]:
    pairs: list[dict] = []

    def finish(narrative_or_rejection) -> None:
        if isinstance(narrative_or_rejection, Rejection):
            report.reject(narrative_or_rejection)
            return
        outcome = generate_instruction(narrative_or_rejection, gateway, endpoint, mode)
        if isinstance(outcome, Rejection):
            report.reject(outcome)
            return
        report.count_pair(narrative_or_rejection.kind)
        pairs.append(outcome)

    for merchant in merchants:
        inputs = {
            "name": merchant.name,
            "introduction": merchant.introduction,
            "category": merchant.leaf_category(),
        }
        finish(run_narrative_agent("merchant", inputs, (merchant.merchant_id,), gateway, endpoint))

    for user in users:
        interaction = _first_interaction_of(bundle, user.user_id)
        if interaction is None:
            report.skips.append(f"{user.user_id}: no interactions for user narrative")
            continue
        merchant = bundle.merchant(interaction.merchant_id)
        if merchant is None:
            report.skips.append(f"{user.user_id}: interaction merchant unresolved")
            continue
        inputs = {
            "profile": profile_text(user),
            "merchant": merchant.name,
            "time": timestamp_text(interaction.timestamp),
            "location": merchant.location.address or merchant.city,
        }
        finish(run_narrative_agent("user", inputs, (user.user_id, merchant.merchant_id), gateway, endpoint))

    for index, interaction in enumerate(interactions):
        user = bundle.user(interaction.user_id)
        merchant = bundle.merchant(interaction.merchant_id)
        if user is None or merchant is None:
            report.skips.append(f"interaction:{index}: unresolved user or merchant")
            continue
        when = timestamp_text(interaction.timestamp)
        inputs = {
            "user_profile": profile_text(user),
            "name": merchant.name,
            "introduction": merchant.introduction,
            "category": merchant.leaf_category(),
            "address": merchant.location.address or merchant.city,
            "hours": hours_text(merchant),
            "time": when,
            "weather": _weather_on(bundle, merchant.city, when[:10]),
        }
        finish(
            run_narrative_agent(
                "interaction", inputs, (interaction.user_id, interaction.merchant_id), gateway, endpoint
            )
        )
    return pairs


def _single_llm_phase(bundle, merchants, users, interactions, gateway, endpoint,
                      report) -> list[dict]:
    """One conversion call per source record, no retries."""
    system, user_template = agent_prompt("synthesis", "single_llm")
    pairs: list[dict] = []
    sources: list[tuple[str, str, dict]] = []
    for merchant in merchants:
        sources.append(("merchant", merchant.merchant_id, export_record("merchants", merchant)))
    for user in users:
        sources.append(("user", user.user_id, export_record("users", user)))
    for index, interaction in enumerate(interactions):
        sources.append(("interaction", f"interaction:{index}", export_record("interactions", interaction)))

    for kind, source_id, record_dict in sources:
        request = ChatRequest(
            messages=(
                Message("system", system),
                Message("user", fill(user_template, record_json=canonical_dumps(record_dict))),
            ),
            temperature=0.7,
            max_output_tokens=512,
            request_tag="synthesis/single_llm",
        )
        response = gateway.complete(request, endpoint)
        parsed = _parse_pair_array(response.text)
        if not parsed:
            report.reject(
                Rejection("single_llm", kind, (source_id,), "unparseable conversion output", response.text)
            )
            continue
        for instruction, output in parsed:
            pairs.append(
                {
                    "instruction": instruction,
                    "output": output,
                    "provenance": {
                        "mode": "single_llm",
                        "agent": kind,
                        "source_ids": [source_id],
                    },
                }
            )
            report.count_pair(kind)
    return pairs


def _parse_pair_array(text: str) -> list[tuple[str, str]]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return []
    if not isinstance(payload, list):
        return []
    pairs = []
    for obj in payload:
        if isinstance(obj, dict) and str(obj.get("instruction", "")).strip() and str(obj.get("output", "")).strip():
            pairs.append((str(obj["instruction"]), str(obj["output"])))
    return pairs


def synthesize_dataset(
    mode: str,
    bundle: StoreBundle,
    budget: SynthesisBudget,
    gateway: Gateway,
    endpoint: EndpointConfig,
    seed: int,
    combinations: tuple[FieldCombination, ...] = DEFAULT_COMBINATIONS,
) -> tuple[list[dict], SynthesisReport]:
    if mode not in MODES:
        raise DataError(f"unknown synthesis mode {mode!r}; expected one of {MODES}")
    if budget.n_merchants > len(bundle.merchants):
        raise DataError(f"budget asks for {budget.n_merchants} merchants, store has {len(bundle.merchants)}")
    if budget.n_users > len(bundle.users):
        raise DataError(f"budget asks for {budget.n_users} users, store has {len(bundle.users)}")
    if budget.n_interactions > len(bundle.interactions):
        raise DataError(
            f"budget asks for {budget.n_interactions} interactions, store has {len(bundle.interactions)}"
        )

    report = SynthesisReport(
        mode=mode,
        seed=seed,
        budget={
            "n_merchants": budget.n_merchants,
            "n_users": budget.n_users,
            "n_interactions": budget.n_interactions,
            "target_pairs": budget.target_pairs,
        },
    )
    merchants, users, interactions = _sampled(bundle, budget, seed)

    pairs: list[dict] = []
    if mode in ("multi_agent", "template_only"):
        pairs.extend(
            _template_phase(mode, bundle, merchants, users, gateway, endpoint, seed, report, combinations)
        )
    if mode == "multi_agent":
        pairs.extend(
            _narrative_phase(mode, bundle, merchants, users, interactions, gateway, endpoint, report)
        )
    if mode == "single_llm":
        pairs.extend(_single_llm_phase(bundle, merchants, users, interactions, gateway, endpoint, report))

    if budget.target_pairs is not None and len(pairs) > budget.target_pairs:
        report.truncated = len(pairs) - budget.target_pairs
        pairs = pairs[: budget.target_pairs]
    report.emitted = len(pairs)
    return pairs, report


def validate_pair(pair: dict) -> None:
    instruction = pair.get("instruction", "")
    output = pair.get("output", "")
    if not str(instruction).strip() or not str(output).strip():
        raise DataError(f"training pair with empty text: {pair!r}")
    for text in (instruction, output):
        leftover = PLACEHOLDER_RE.search(str(text))
        if leftover:
            raise DataError(f"unresolved placeholder {leftover.group(0)!r} in pair: {str(text)[:80]!r}")
    if "provenance" not in pair or not isinstance(pair["provenance"], dict):
        raise DataError("training pair missing provenance object")


def export_training_file(
    pairs: list[dict],
    path: Path,
    mode: str,
    seed: int,
    extra_manifest: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Write deduplicated training JSONL plus its manifest; returns the manifest."""
    if not pairs:
        raise DataError("refusing to export an empty dataset")
    seen: set[str] = set()
    kept: list[dict] = []
    for pair in pairs:
        validate_pair(pair)
        key = sha256_text(str(pair["instruction"]) + "\x1f" + str(pair["output"]))
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for pair in kept:
            fh.write(canonical_dumps(pair))
            fh.write("\n")
    manifest: dict[str, Any] = {
        "pairs_written": len(kept),
        "duplicates_removed": len(pairs) - len(kept),
        "mode": mode,
        "seed": seed,
        "reference_hyperparameters": dict(REFERENCE_HYPERPARAMETERS),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    write_json(Path(str(path) + ".manifest.json"), manifest)
    return manifest


def read_training_file(path: Path) -> list[dict]:
    pairs = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            pair = json.loads(line)
            validate_pair(pair)
            pairs.append(pair)
    return pairs
