from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locallife.errors import DataError, EndpointError
from locallife.gateway import (
    ChatRequest,
    Gateway,
    Message,
    MockScript,
    configure_mock,
    request_fingerprint,
)
from locallife.platform_data import ReviewRecord
from locallife.synthesis import export_training_file, read_training_file
from locallife.workflows import (
    WORKFLOW_STEPS,
    apply_over_store,
    generate_function_tags,
    generate_query_suggestions,
    run_workflow,
    score_review_dimensions,
    shortest_unique_prefix,
    trace_to_instruction,
    workflow_spec,
)
from locallife.prompts import agent_prompt, fill


def composite_question(task_id: str = "recommendation"):
    return {
        "question_id": f"{task_id}-0000",
        "task_id": task_id,
        "stem": "User profile: group: families. Recent activity: orders. Which merchant next?",
        "options": ["Golden Hotpot House 0", "Cozy Spa Corner 5", "Lucky KTV Hall 7", "Grand Bakery 9"],
        "correct_index": 1,
        "construction": {"source_ids": ["u0001"], "evidence": {}, "seed": 1},
    }


def test_workflow_step_orders_are_the_canonical_ones():
    assert WORKFLOW_STEPS["recommendation"] == (
        "similar_profile_patterns",
        "behavior_sequence_preferences",
        "context_adjustment",
        "prediction",
    )
    assert WORKFLOW_STEPS["search"] == (
        "similar_profile_patterns",
        "query_intent_analysis",
        "context_adjustment",
        "click_prediction",
    )
    assert WORKFLOW_STEPS["content_marketing"] == (
        "similar_profile_preferences",
        "topic_sentiment_parsing",
        "quality_evaluation",
        "final_choice",
    )
    for workflow_id, steps in WORKFLOW_STEPS.items():
        spec = workflow_spec(workflow_id)
        assert spec.step_names == steps


@pytest.mark.parametrize("workflow_id", ["recommendation", "search", "content_marketing"])
def test_trace_has_all_steps_in_order_one_call_each(workflow_id, echo_endpoint):
    gateway = Gateway()
    question = composite_question(workflow_id)
    prediction, trace = run_workflow(workflow_id, question, gateway, echo_endpoint)
    assert [s["name"] for s in trace.steps] == list(WORKFLOW_STEPS[workflow_id])
    assert gateway.call_count(f"workflow/{workflow_id}/") == len(WORKFLOW_STEPS[workflow_id])
    assert not trace.truncated
    assert prediction is not None


def test_final_step_parse_the_answer_is_b(gateway):
    question = composite_question()
    # Script every step; the final step says "The answer is B".
    spec = workflow_spec("recommendation")
    from locallife.harness.prompting import options_block

    fixtures = {}
    prior: list[tuple[str, str]] = []
    responses = ["patterns", "preferences", "context", "The answer is B"]
    for step_name, canned in zip(spec.step_names, responses):
        prior_text = "\n".join(f"[{n}] {t}" for n, t in prior) or "(none yet)"
        user = fill(
            spec.prompts[step_name],
            stem=question["stem"],
            options_block=options_block(question["options"]),
            similar_profiles="No aggregate statistics available.",
            prior_steps=prior_text,
        )
        request = ChatRequest(
            messages=(Message("user", user),),
            temperature=0.0,
            max_output_tokens=1024,
            request_tag=f"workflow/recommendation/{step_name}",
        )
        fixtures[request_fingerprint(request)] = canned
        prior.append((step_name, canned))
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    prediction, trace = run_workflow("recommendation", question, gateway, endpoint)
    assert prediction == 1
    assert trace.steps[-1]["response"] == "The answer is B"


def test_step_failure_truncates_trace(monkeypatch, echo_endpoint):
    gateway = Gateway()
    original = gateway.complete
    calls = {"n": 0}

    def flaky(request, endpoint):
        calls["n"] += 1
        if calls["n"] == 2:
            raise EndpointError("step exploded", status=500)
        return original(request, endpoint)

    monkeypatch.setattr(gateway, "complete", flaky)
    prediction, trace = run_workflow("recommendation", composite_question(), gateway, echo_endpoint)
    assert prediction is None
    assert trace.truncated
    assert len(trace.steps) == 2
    assert "error" in trace.steps[-1]
    assert trace.prediction is None


def test_question_workflow_mismatch_is_fatal(gateway, echo_endpoint):
    with pytest.raises(DataError, match="not 'search'"):
        run_workflow("search", composite_question("recommendation"), gateway, echo_endpoint)


def _trace_for(question, prediction: int):
    steps = [
        {"name": name, "prompt_fingerprint": f"fp{i}", "response": f"step {i} reasoning"}
        for i, name in enumerate(WORKFLOW_STEPS["recommendation"])
    ]
    return {
        "workflow_id": "recommendation",
        "question_id": question["question_id"],
        "steps": steps,
        "prediction": prediction,
        "total_tokens": 100,
        "error": None,
    }


def test_flywheel_pair_embeds_all_steps_in_order():
    question = composite_question()
    pair = trace_to_instruction(_trace_for(question, prediction=1), question)
    assert pair is not None
    positions = [pair["output"].find(f"step {i} reasoning") for i in range(4)]
    assert all(p >= 0 for p in positions)
    assert positions == sorted(positions)
    assert pair["output"].rstrip().endswith("Answer: B")
    assert question["stem"] in pair["instruction"]
    assert "B. Cozy Spa Corner 5" in pair["instruction"]


def test_flywheel_excludes_wrong_predictions_by_default():
    question = composite_question()
    assert trace_to_instruction(_trace_for(question, prediction=0), question) is None
    kept = trace_to_instruction(_trace_for(question, prediction=0), question, include_incorrect=True)
    assert kept is not None


def test_flywheel_truncated_trace_is_an_error():
    question = composite_question()
    trace = _trace_for(question, prediction=1)
    trace["error"] = "step failed"
    with pytest.raises(DataError, match="truncated"):
        trace_to_instruction(trace, question)


def test_flywheel_pairs_pass_training_schema(tmp_path):
    question = composite_question()
    pair = trace_to_instruction(_trace_for(question, prediction=1), question)
    export_training_file([pair], tmp_path / "fly.jsonl", mode="flywheel", seed=0)
    (loaded,) = read_training_file(tmp_path / "fly.jsonl")
    assert loaded["provenance"]["mode"] == "flywheel"


# -- appliers ---------------------------------------------------------------------


def _tag_fixtures(merchant, texts: list[str]) -> dict[str, str]:
    system, user_template = agent_prompt("appliers", "function_tags")
    from locallife.prompts import render_input_block

    inputs = {
        "name": merchant.name,
        "category": merchant.leaf_category(),
        "introduction": merchant.introduction,
    }
    fixtures = {}
    for round_no, text in enumerate(texts, start=1):
        user = fill(user_template, input_block=render_input_block(inputs))
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.0,
            max_output_tokens=256,
            request_tag="apply/function_tags",
        )
        fixtures[request_fingerprint(request)] = text
    return fixtures


def test_function_tags_two_valid_tags(bundle, gateway):
    merchant = list(bundle.merchants)[0]
    fixtures = _tag_fixtures(merchant, ["suitable for family outing; group dining"])
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    result = generate_function_tags(merchant, gateway, endpoint)
    assert result.tags == ["suitable for family outing", "group dining"]


def test_function_tags_truncated_to_ten_with_warning(bundle, gateway):
    merchant = list(bundle.merchants)[0]
    fixtures = _tag_fixtures(merchant, ["; ".join(f"tag number {i}" for i in range(15))])
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    result = generate_function_tags(merchant, gateway, endpoint)
    assert len(result.tags) == 10
    assert any("truncated" in w for w in result.warnings)


def test_function_tags_deduplicated(bundle, gateway):
    merchant = list(bundle.merchants)[0]
    fixtures = _tag_fixtures(merchant, ["family outing; Family Outing; family outing"])
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    result = generate_function_tags(merchant, gateway, endpoint)
    assert result.tags == ["family outing"]


def test_function_tags_persistent_garbage_is_error_record(bundle, gateway):
    merchant = list(bundle.merchants)[0]
    too_long = " ".join(["word"] * 12)
    fixtures = _tag_fixtures(merchant, [too_long, too_long, too_long])
    endpoint = configure_mock(MockScript(fixtures=fixtures, fallback="letter"))
    result = generate_function_tags(merchant, gateway, endpoint)
    from locallife.workflows import ApplierError

    assert isinstance(result, ApplierError)
    assert "no valid tags" in result.reason


def test_shortest_unique_prefixes_ketoconazole_example():
    queries = ["ketoconazole ointment", "keto diet plan"]
    assert shortest_unique_prefix(queries[0], [queries[1]]) == "ketoc"
    assert shortest_unique_prefix(queries[1], [queries[0]]) == "keto "


def test_single_suggestion_prefix_is_first_character():
    assert shortest_unique_prefix("spa near me", []) == "s"


@given(
    queries=st.lists(
        st.text(alphabet="abcdefg ", min_size=1, max_size=12),
        min_size=1,
        max_size=8,
        unique=True,
    )
)
@settings(max_examples=150, deadline=None)
def test_prefixes_are_unambiguous_within_the_set(queries):
    for query in queries:
        others = [o for o in queries if o != query]
        prefix = shortest_unique_prefix(query, others)
        assert query.startswith(prefix)
        if prefix != query:
            assert not any(other.startswith(prefix) for other in others)
            if len(prefix) > 1:
                shorter = prefix[:-1]
                assert any(other.startswith(shorter) for other in others)


def test_query_suggestions_deduplicate_before_prefixes(bundle, gateway, echo_endpoint):
    merchant = list(bundle.merchants)[0]
    fields = {"name": merchant.name, "category": merchant.leaf_category(),
              "introduction": merchant.introduction}
    result = generate_query_suggestions(merchant.merchant_id, fields, gateway, echo_endpoint)
    queries = [s["query"] for s in result.suggestions]
    assert len(queries) == len(set(queries))
    for suggestion in result.suggestions:
        assert suggestion["query"].startswith(suggestion["prefix"]) or suggestion["prefix"] == suggestion["query"]


def _review_fixtures(review, texts: list[str]) -> dict[str, str]:
    system, user_template = agent_prompt("appliers", "review_scores")
    fixtures = {}
    for round_no, text in enumerate(texts, start=1):
        user = fill(user_template, review_text=review.text)
        if round_no > 1:
            user += f"\n\nAttempt token: {round_no}"
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.0,
            max_output_tokens=256,
            request_tag="apply/review_scores",
        )
        fixtures[request_fingerprint(request)] = text
    return fixtures


GOOD_CARD = (
    "in_depth_content: 3\nactionable_suggestions: 4\nnatural_colloquial: 5\n"
    "credible_engaging: 2\nnon_promotional: 1\nnon_ai_generated: 1\noverall_usefulness: 4"
)


def _review():
    return ReviewRecord(review_id="r1", user_id="u1", merchant_id="m1",
                        text="Great broth, book ahead.")


def test_review_scorecard_parses_well_formed_block(gateway):
    review = _review()
    endpoint = configure_mock(MockScript(fixtures=_review_fixtures(review, [GOOD_CARD])))
    card = score_review_dimensions(review, gateway, endpoint)
    assert card.scores["in_depth_content"] == 3
    assert card.scores["non_promotional"] == 1
    assert set(card.scores) == {
        "in_depth_content", "actionable_suggestions", "natural_colloquial",
        "credible_engaging", "non_promotional", "non_ai_generated", "overall_usefulness",
    }


def test_review_scorecard_six_fields_is_error_after_retries(gateway):
    review = _review()
    six = "\n".join(GOOD_CARD.splitlines()[:6])
    endpoint = configure_mock(MockScript(fixtures=_review_fixtures(review, [six, six, six])))
    result = score_review_dimensions(review, gateway, endpoint)
    from locallife.workflows import ApplierError

    assert isinstance(result, ApplierError)
    assert "unparseable scorecard" in result.reason


def test_review_scorecard_out_of_range_is_error_after_retries(gateway):
    review = _review()
    bad = GOOD_CARD.replace("in_depth_content: 3", "in_depth_content: 9")
    endpoint = configure_mock(MockScript(fixtures=_review_fixtures(review, [bad, bad, bad])))
    result = score_review_dimensions(review, gateway, endpoint)
    from locallife.workflows import ApplierError

    assert isinstance(result, ApplierError)


def test_apply_batch_continues_past_item_errors(bundle, gateway, echo_endpoint):
    from locallife.platform_data import Store

    merchants = Store("merchants", list(bundle.merchants)[:4])
    results, errors = apply_over_store("tags", merchants, gateway, echo_endpoint)
    assert len(results) == 4
    assert errors == []


def test_workflow_vs_direct_accuracies_match_scripted_rates(bundle):
    """Harness arithmetic mirror of the workflow-vs-no-workflow comparison:
    workflow finals scripted all-correct, direct answers scripted to a fixed
    half-correct pattern; measured accuracies must equal the scripted rates."""
    from locallife.benchmark import QCConfig, assemble_benchmark, build_all_tasks
    from locallife.harness import PromptStrategy, evaluate_model, render_prompt, score_run
    from locallife.harness.prompting import LETTERS, options_block
    from locallife.gateway import request_fingerprint

    questions, _ = build_all_tasks(bundle, QCConfig(), per_task=4, seed=33)
    body = assemble_benchmark(
        [q for q in questions if q.task_id == "recommendation"], "riverton", 33, QCConfig()
    )
    composite = body["questions"]
    assert len(composite) == 4

    # Workflow run: echo handles intermediate steps, fixtures pin each final
    # step to the correct letter.
    spec = workflow_spec("recommendation")
    fixtures: dict[str, str] = {}
    echo = configure_mock(MockScript(fallback="agent_echo"))
    for question in composite:
        probe_gateway = Gateway()
        _, probe = run_workflow("recommendation", question, probe_gateway, echo)
        fixtures[probe.steps[-1]["prompt_fingerprint"]] = LETTERS[question["correct_index"]]
    scripted = configure_mock(MockScript(fixtures=fixtures, fallback="agent_echo"))
    workflow_correct = 0
    for question in composite:
        prediction, _ = run_workflow("recommendation", question, Gateway(), scripted)
        if prediction == question["correct_index"]:
            workflow_correct += 1
    assert workflow_correct == len(composite)  # scripted rate: 100%

    # Direct run: every other question answered correctly.
    direct_fixtures = {}
    for index, question in enumerate(composite):
        request = render_prompt(question, PromptStrategy("zero_shot"))
        answer = question["correct_index"] if index % 2 == 0 else (
            (question["correct_index"] + 1) % len(question["options"])
        )
        direct_fixtures[request_fingerprint(request)] = LETTERS[answer]
    direct_endpoint = configure_mock(MockScript(fixtures=direct_fixtures, fallback="letter"))
    run = evaluate_model(body, direct_endpoint, PromptStrategy("zero_shot"), Gateway(), seed=1)
    table = score_run(run, body)
    assert table.per_task["recommendation"] == pytest.approx(50.0)
