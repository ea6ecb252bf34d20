from __future__ import annotations

from locallife.prompts import agent_prompt, catalog, fill, render_input_block
from locallife.workflows import WORKFLOW_STEPS

# Phrases the mock's agent-echo rules key on; each must stay present in its
# catalog prompt or the deterministic echo stops recognizing the request.
MARKERS = {
    ("synthesis", "template_agent"): "question-answer templates",
    ("synthesis", "merchant_agent"): "first person as the merchant",
    ("synthesis", "user_agent"): "first person as the platform user",
    ("synthesis", "interaction_agent"): "simulated dialogue",
    ("synthesis", "instruction_agent"): "write the single question",
    ("synthesis", "single_llm"): "Convert the record below",
    ("appliers", "function_tags"): "short function tags",
    ("appliers", "query_suggestions"): "likely search queries",
    ("appliers", "review_scores"): "Rate the review below",
}


def test_every_agent_prompt_carries_its_mock_marker():
    for (section, name), marker in MARKERS.items():
        system, user = agent_prompt(section, name)
        assert marker in system + "\n" + user, (section, name, marker)


def test_workflow_catalog_matches_canonical_step_orders():
    data = catalog()
    for workflow_id, steps in WORKFLOW_STEPS.items():
        entry = data["workflows"][workflow_id]
        assert tuple(entry["step_names"]) == steps
        assert set(entry["prompts"]) == set(steps)


def test_final_workflow_steps_demand_a_letter():
    data = catalog()
    for workflow_id, steps in WORKFLOW_STEPS.items():
        final_prompt = data["workflows"][workflow_id]["prompts"][steps[-1]]
        assert "Answer with the letter" in final_prompt


def test_fill_replaces_only_declared_slots():
    text = "Use {name} but keep {placeholder} braces."
    assert fill(text, name="X") == "Use X but keep {placeholder} braces."


def test_render_input_block_preserves_order():
    block = render_input_block({"b_key": "two", "a_key": "one"})
    assert block == "b_key: two\na_key: one"
