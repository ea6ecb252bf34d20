from __future__ import annotations

import json

import pytest

from locallife.errors import DataError
from locallife.gateway import (
    ChatRequest,
    Gateway,
    Message,
    MockScript,
    configure_mock,
    request_fingerprint,
)
from locallife.prompts import agent_prompt, fill
from locallife.synthesis import (
    FieldCombination,
    SynthesisBudget,
    export_training_file,
    generate_instruction,
    generate_templates,
    instantiate_templates,
    read_training_file,
    run_narrative_agent,
    synthesize_dataset,
)
from locallife.synthesis.narrative import NarrativeText, Rejection

COMBO = FieldCombination("merchant", ("name", "introduction", "category_path"))


def test_generate_templates_meets_floor_and_covers_fields(gateway, echo_endpoint):
    result = generate_templates(COMBO, gateway, echo_endpoint, seed=3)
    assert len(result.templates) >= 10
    for spec in result.templates:
        text = spec.instruction_template + " " + spec.output_template
        for field in COMBO.fields:
            assert "{" + field + "}" in text


def test_generate_templates_rejects_unknown_placeholder(gateway):
    bad_payload = json.dumps(
        [{"instruction": "What about {price}?", "output": "The {name} has {introduction} {category_path}."}]
        + [
            {"instruction": f"Q{i} {{name}} {{introduction}}?", "output": "A: {category_path}."}
            for i in range(10)
        ]
    )
    system, user_template = agent_prompt("synthesis", "template_agent")

    fixtures = {}
    for round_no in (1, 2, 3):
        user = fill(user_template, count="10", kind=COMBO.kind, fields=", ".join(COMBO.fields))
        user += f"\n\nBatch token: 3-{round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.7,
            max_output_tokens=512,
            request_tag="synthesis/template_agent/merchant",
        )
        fixtures[request_fingerprint(request)] = bad_payload
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    result = generate_templates(COMBO, gateway, endpoint, seed=3)
    assert result.rejected >= 1
    assert any("unknown placeholder" in w for w in result.warnings)
    assert len(result.templates) == 10


def test_generate_templates_is_deterministic(echo_endpoint):
    first = generate_templates(COMBO, Gateway(), echo_endpoint, seed=11)
    second = generate_templates(COMBO, Gateway(), echo_endpoint, seed=11)
    assert [t.template_id for t in first.templates] == [t.template_id for t in second.templates]


def test_instantiate_substitutes_all_placeholders(bundle):
    merchants = list(bundle.merchants)[:5]
    ids = [m.merchant_id for m in merchants]
    templates = generate_templates(COMBO, Gateway(), configure_mock(MockScript(fallback="agent_echo")), seed=1).templates[:10]
    pairs, skips = instantiate_templates(templates, merchants, "multi_agent", ids)
    assert len(pairs) == 50
    assert skips == []
    for pair in pairs:
        assert "{" not in pair["instruction"] or "}" not in pair["instruction"]
        assert pair["provenance"]["agent"] == "template"
    named = [p for p in pairs if merchants[0].name in p["instruction"] + p["output"]]
    assert named


def test_instantiate_skips_record_with_missing_field(bundle):
    merchants = list(bundle.merchants)[:1]
    combo = FieldCombination("merchant", ("name", "brand"))
    brandless = [m for m in bundle.merchants if m.brand is None][:1]
    templates = generate_templates(combo, Gateway(), configure_mock(MockScript(fallback="agent_echo")), seed=1).templates[:3]
    pairs, skips = instantiate_templates(templates, brandless, "multi_agent", [brandless[0].merchant_id])
    assert pairs == []
    assert len(skips) == 3


def test_merchant_narrative_includes_inputs_verbatim(gateway, echo_endpoint, bundle):
    merchant = list(bundle.merchants)[0]
    inputs = {
        "name": merchant.name,
        "introduction": merchant.introduction,
        "category": merchant.leaf_category(),
    }
    outcome = run_narrative_agent("merchant", inputs, (merchant.merchant_id,), gateway, echo_endpoint)
    assert isinstance(outcome, NarrativeText)
    assert outcome.text.startswith("I am ")
    assert "I belong to" in outcome.text
    for value in inputs.values():
        assert value in outcome.text


def test_narrative_rejected_when_inputs_missing(gateway):
    inputs = {"name": "Lakeview Spa", "introduction": "quiet", "category": "Spa"}
    fixtures = {}
    # Scripted output that never mentions the name, across all three attempts.
    system, user_template = agent_prompt("synthesis", "merchant_agent")
    from locallife.prompts import render_input_block

    for round_no in (1, 2, 3):
        user = fill(user_template, input_block=render_input_block(inputs))
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.7,
            max_output_tokens=1024,
            request_tag="synthesis/merchant_agent",
        )
        fixtures[request_fingerprint(request)] = "I am a business. quiet. Spa."
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    outcome = run_narrative_agent("merchant", inputs, ("m1",), gateway, endpoint)
    assert isinstance(outcome, Rejection)
    assert "Lakeview Spa" in outcome.reason or "omitted" in outcome.reason
    assert outcome.last_output == "I am a business. quiet. Spa."


def test_interaction_narrative_is_dialogue(gateway, echo_endpoint):
    inputs = {
        "user_profile": "age_band: 30s; group: families; interest: Hotpot",
        "name": "Golden Hotpot House 0",
        "introduction": "Bubbling broth tables",
        "category": "Hotpot",
        "address": "Harbor Plaza, North District",
        "hours": "Mon 11:00-22:00",
        "time": "2024-03-01 18:30",
        "weather": "rainy",
    }
    outcome = run_narrative_agent("interaction", inputs, ("u1", "m1"), gateway, echo_endpoint)
    assert isinstance(outcome, NarrativeText)
    assert "a user says" in outcome.text
    assert "The merchant replies" in outcome.text


def test_generate_instruction_output_is_narrative_byte_exact(gateway, echo_endpoint):
    narrative = NarrativeText(
        kind="merchant",
        text="I am Lakeview Spa, quiet spa by the lake. I belong to Spa because of the soaking rooms.",
        source_ids=("m1",),
        fingerprint="ab" * 32,
    )
    pair = generate_instruction(narrative, gateway, echo_endpoint, "multi_agent")
    assert isinstance(pair, dict)
    assert pair["output"] == narrative.text
    assert pair["instruction"].strip()
    assert pair["provenance"]["agent"] == "merchant"


def test_generate_instruction_empty_question_thrice_is_rejected(gateway):
    narrative = NarrativeText(
        kind="merchant", text="I am a spa.", source_ids=("m1",), fingerprint="cd" * 32
    )
    system, user_template = agent_prompt("synthesis", "instruction_agent")
    fixtures = {}
    for round_no in (1, 2, 3):
        user = fill(user_template, narrative=narrative.text)
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.7,
            max_output_tokens=512,
            request_tag="synthesis/instruction_agent",
        )
        fixtures[request_fingerprint(request)] = "   "
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    outcome = generate_instruction(narrative, gateway, endpoint, "multi_agent")
    assert isinstance(outcome, Rejection)
    assert "empty question" in outcome.reason


def test_mode_separation_call_counts(bundle, echo_endpoint):
    budget = SynthesisBudget(n_merchants=5, n_users=4, n_interactions=3)

    gateway = Gateway()
    pairs, report = synthesize_dataset("template_only", bundle, budget, gateway, echo_endpoint, seed=5)
    assert gateway.call_count("synthesis/merchant_agent") == 0
    assert gateway.call_count("synthesis/user_agent") == 0
    assert gateway.call_count("synthesis/interaction_agent") == 0
    assert gateway.call_count("synthesis/instruction_agent") == 0
    assert gateway.call_count("synthesis/template_agent") > 0
    assert report.pairs_by_agent.keys() == {"template"}
    assert pairs

    gateway = Gateway()
    pairs, report = synthesize_dataset("single_llm", bundle, budget, gateway, echo_endpoint, seed=5)
    assert gateway.call_count() == gateway.call_count("synthesis/single_llm") == 5 + 4 + 3
    assert pairs

    gateway = Gateway()
    pairs, report = synthesize_dataset("multi_agent", bundle, budget, gateway, echo_endpoint, seed=5)
    assert set(report.pairs_by_agent) == {"template", "merchant", "user", "interaction"}
    assert gateway.call_count("synthesis/merchant_agent") == 5
    assert gateway.call_count("synthesis/interaction_agent") == 3


def test_template_only_pair_count_is_templates_times_merchants(bundle, echo_endpoint):
    combo = (COMBO,)
    budget = SynthesisBudget(n_merchants=5, n_users=0, n_interactions=0)
    gateway = Gateway()
    pairs, report = synthesize_dataset(
        "template_only", bundle, budget, gateway, echo_endpoint, seed=5, combinations=combo
    )
    # The echo endpoint yields 12 valid templates for the one combination, so
    # 5 merchants give exactly 12 x 5 pairs and zero narrative-agent calls.
    assert report.pairs_by_agent["template"] == len(pairs) == 12 * 5
    assert gateway.call_count("synthesis/merchant_agent") == 0


def test_synthesis_deterministic_export(tmp_path, bundle, echo_endpoint):
    budget = SynthesisBudget(n_merchants=4, n_users=3, n_interactions=2)
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    for out in (out1, out2):
        pairs, report = synthesize_dataset("multi_agent", bundle, budget, Gateway(), echo_endpoint, seed=9)
        export_training_file(pairs, out, mode="multi_agent", seed=9)
    assert out1.read_bytes() == out2.read_bytes()


def test_export_dedupes_and_records_hyperparameters(tmp_path):
    pair = {
        "instruction": "What is there?",
        "output": "A spa.",
        "provenance": {"mode": "multi_agent", "agent": "merchant", "source_ids": ["m1"]},
    }
    manifest = export_training_file([pair, dict(pair)], tmp_path / "d.jsonl", mode="multi_agent", seed=1)
    assert manifest["pairs_written"] == 1
    assert manifest["duplicates_removed"] == 1
    hp = manifest["reference_hyperparameters"]
    assert hp["learning_rate"] == "6e-6"
    assert hp["epochs"] == 2
    assert hp["per_device_batch_size"] == 4
    assert hp["gradient_accumulation_steps"] == 4
    assert hp["lr_schedule"] == "cosine"
    again = read_training_file(tmp_path / "d.jsonl")
    assert again == [pair]


def test_export_rejects_unresolved_placeholder(tmp_path):
    pair = {
        "instruction": "Tell me about {name}.",
        "output": "ok",
        "provenance": {"mode": "multi_agent", "agent": "template", "source_ids": []},
    }
    with pytest.raises(DataError, match="unresolved placeholder"):
        export_training_file([pair], tmp_path / "d.jsonl", mode="multi_agent", seed=1)


def test_budget_above_store_size_is_an_error(bundle, echo_endpoint):
    budget = SynthesisBudget(n_merchants=10_000, n_users=0, n_interactions=0)
    with pytest.raises(DataError, match="10000 merchants"):
        synthesize_dataset("template_only", bundle, budget, Gateway(), echo_endpoint, seed=1)


def test_target_pairs_truncates_deterministically(bundle, echo_endpoint):
    budget = SynthesisBudget(n_merchants=5, n_users=0, n_interactions=0, target_pairs=20)
    pairs, report = synthesize_dataset("template_only", bundle, budget, Gateway(), echo_endpoint, seed=5)
    assert len(pairs) == 20
    assert report.truncated > 0
    assert report.emitted == 20
