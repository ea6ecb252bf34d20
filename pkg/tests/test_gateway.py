from __future__ import annotations

import json

import httpx
import pytest

from locallife.errors import EndpointError
from locallife.gateway import (
    ChatRequest,
    EndpointConfig,
    Gateway,
    Message,
    MockScript,
    configure_mock,
    request_fingerprint,
)


def user_request(text: str, temperature: float = 0.0, tag: str = "") -> ChatRequest:
    return ChatRequest(messages=(Message("user", text),), temperature=temperature, request_tag=tag)


MCQ_TEXT = (
    "Which option fits?\n\nOptions:\nA. one\nB. two\nC. three\nD. four\n\n"
    "Answer with the letter of the single best option (A-D)."
)


def test_mock_fixture_lookup_wins():
    request = user_request(MCQ_TEXT)
    endpoint = configure_mock(MockScript(fixtures={request_fingerprint(request): "B"}))
    response = Gateway().complete(request, endpoint)
    assert response.text == "B"
    assert response.finish_reason == "stop"


def test_mock_same_request_twice_is_byte_identical():
    request = user_request(MCQ_TEXT)
    endpoint = configure_mock()
    gateway = Gateway()
    first = gateway.complete(request, endpoint)
    second = gateway.complete(request, endpoint)
    assert first.text == second.text
    assert first == second


def test_mock_letter_fallback_stays_in_range():
    endpoint = configure_mock()
    gateway = Gateway()
    response = gateway.complete(user_request(MCQ_TEXT), endpoint)
    assert response.text in {"A", "B", "C", "D"}


def test_fingerprint_sensitive_to_temperature():
    hot = user_request("hello", temperature=0.7)
    cold = user_request("hello", temperature=0.0)
    assert request_fingerprint(hot) != request_fingerprint(cold)


def test_mock_calls_are_logged_and_counted():
    gateway = Gateway()
    endpoint = configure_mock()
    gateway.complete(user_request(MCQ_TEXT, tag="eval/q1"), endpoint)
    gateway.complete(user_request(MCQ_TEXT + " ", tag="synthesis/templates"), endpoint)
    assert gateway.call_count() == 2
    assert gateway.call_count("eval/") == 1
    assert gateway.call_count("synthesis/") == 1


def test_batch_preserves_input_order():
    gateway = Gateway()
    endpoint = configure_mock(MockScript(fixtures={}, fallback="letter"))
    requests = [user_request(f"item {i}\n\nOptions:\nA. x\nB. y\n\nAnswer with the letter.") for i in range(7)]
    result = gateway.complete_batch(requests, endpoint, max_parallel=2)
    assert result.errors == {}
    singles = [gateway.complete(r, endpoint).text for r in requests]
    assert [r.text for r in result.responses] == singles


def test_batch_of_identical_requests_is_uniform():
    gateway = Gateway()
    endpoint = configure_mock()
    requests = [user_request(MCQ_TEXT) for _ in range(100)]
    result = gateway.complete_batch(requests, endpoint, max_parallel=8)
    texts = {r.text for r in result.responses}
    assert len(texts) == 1


def _flaky_transport(fail_times: int, status: int = 429):
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        if calls["n"] <= fail_times:
            return httpx.Response(status, json={"error": "slow down"})
        return httpx.Response(
            200,
            json={
                "choices": [{"message": {"content": "B"}, "finish_reason": "stop"}],
                "usage": {"prompt_tokens": 10, "completion_tokens": 1},
            },
        )

    return httpx.MockTransport(handler), calls


def remote_endpoint(**overrides) -> EndpointConfig:
    defaults = dict(
        endpoint_id="remote-test",
        kind="remote",
        model_name="test-model",
        base_url="http://testserver/v1",
        retry_max_attempts=3,
        retry_base_backoff_ms=1,
    )
    defaults.update(overrides)
    return EndpointConfig(**defaults)


def test_remote_retries_transient_429_then_succeeds():
    transport, calls = _flaky_transport(fail_times=1)
    gateway = Gateway(transport=transport, sleeper=lambda _: None)
    response = gateway.complete(user_request("hi", tag="t"), remote_endpoint())
    assert response.text == "B"
    assert calls["n"] == 2
    attempts = [e["attempt"] for e in gateway.log]
    assert attempts == [1, 2]


def test_remote_exhausted_retries_raise_with_last_status():
    transport, _ = _flaky_transport(fail_times=10, status=503)
    gateway = Gateway(transport=transport, sleeper=lambda _: None)
    with pytest.raises(EndpointError) as excinfo:
        gateway.complete(user_request("hi"), remote_endpoint())
    assert excinfo.value.status == 503
    assert gateway.call_count() == 3


def test_remote_non_retryable_status_fails_fast():
    transport, calls = _flaky_transport(fail_times=10, status=401)
    gateway = Gateway(transport=transport, sleeper=lambda _: None)
    with pytest.raises(EndpointError, match="non-retryable"):
        gateway.complete(user_request("hi"), remote_endpoint())
    assert calls["n"] == 1


def test_unset_auth_variable_is_fatal(monkeypatch):
    monkeypatch.delenv("LL_TEST_TOKEN", raising=False)
    gateway = Gateway()
    with pytest.raises(EndpointError, match="LL_TEST_TOKEN"):
        gateway.complete(user_request("hi"), remote_endpoint(auth_env="LL_TEST_TOKEN"))


def test_batch_partial_failure_reports_index_without_aborting():
    # Index 1 targets a failing path; 0 and 2 are mock-free successes.
    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        if "boom" in body["messages"][0]["content"]:
            return httpx.Response(500, json={"error": "x"})
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "ok"}, "finish_reason": "stop"}]}
        )

    gateway = Gateway(transport=httpx.MockTransport(handler), sleeper=lambda _: None)
    requests = [user_request("fine 0"), user_request("boom"), user_request("fine 2")]
    result = gateway.complete_batch(requests, remote_endpoint(retry_max_attempts=2))
    assert result.responses[0] is not None and result.responses[2] is not None
    assert result.responses[1] is None
    assert list(result.errors) == [1]


def test_batch_total_failure_raises_summary():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, json={"error": "x"})

    gateway = Gateway(transport=httpx.MockTransport(handler), sleeper=lambda _: None)
    with pytest.raises(EndpointError, match="all 2 batch requests failed"):
        gateway.complete_batch([user_request("a"), user_request("b")], remote_endpoint(retry_max_attempts=1))


def test_log_counts_each_retry_individually():
    transport, _ = _flaky_transport(fail_times=2)
    gateway = Gateway(transport=transport, sleeper=lambda _: None)
    gateway.complete(user_request("hi"), remote_endpoint())
    assert gateway.call_count() == 3
    assert [e["status"] for e in gateway.log] == ["error", "error", "ok"]
