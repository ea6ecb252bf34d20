"""Uniform access to chat-completion endpoints.

One wire protocol (OpenAI-compatible ``POST {base_url}/chat/completions``)
covers both hosted APIs and locally served models.  A deterministic mock
endpoint kind makes every pipeline in this repository runnable with zero
network access.  Every attempted call, including each retry, is appended to
the gateway's call log.
"""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import httpx

from .errors import EndpointError, InternalError
from .ioutil import canonical_dumps, sha256_text

RETRYABLE_STATUSES = {408, 429, 500, 502, 503, 504}


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def as_dict(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_output_tokens: int = 256
    stop: tuple[str, ...] = ()
    request_tag: str = ""

    def __post_init__(self):
        if not self.messages:
            raise InternalError("ChatRequest needs at least one message")
        if self.messages[0].role not in ("system", "user"):
            raise InternalError(f"first message role must be system or user, got {self.messages[0].role!r}")
        if self.temperature < 0:
            raise InternalError(f"temperature must be >= 0, got {self.temperature}")

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


def request_fingerprint(request: ChatRequest) -> str:
    """Stable hash over canonicalized (messages, temperature, max_output_tokens)."""
    payload = canonical_dumps(
        {
            "messages": [m.as_dict() for m in request.messages],
            "temperature": request.temperature,
            "max_output_tokens": request.max_output_tokens,
        }
    )
    return sha256_text(payload)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str  # stop | length | error
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0

    def __post_init__(self):
        if self.finish_reason == "stop" and not self.text:
            raise InternalError("finish_reason=stop requires non-empty text")


@dataclass(frozen=True)
class MockScript:
    """Canned behavior for a mock endpoint.

    ``fixtures`` maps request fingerprints to exact response texts and always
    wins.  ``fallback`` selects the rule for unscripted requests: ``letter``
    answers multiple-choice prompts with a hash-derived option letter;
    ``agent_echo`` additionally recognizes the canonical agent prompts and
    echoes back structurally valid output built from the embedded inputs.
    """

    fixtures: dict[str, str] = field(default_factory=dict)
    fallback: str = "letter"

    def __post_init__(self):
        if self.fallback not in ("letter", "agent_echo"):
            raise InternalError(f"unknown mock fallback rule {self.fallback!r}")


@dataclass(frozen=True)
class EndpointConfig:
    endpoint_id: str
    kind: str = "mock"  # remote | mock
    model_name: str = "mock-model"
    base_url: str = ""
    auth_env: str = ""  # name of the env var holding the token, never the token
    max_parallel: int = 4
    retry_max_attempts: int = 3
    retry_base_backoff_ms: int = 250
    timeout_s: float = 60.0
    mock_script: MockScript | None = None

    def __post_init__(self):
        if self.kind not in ("remote", "mock"):
            raise InternalError(f"unknown endpoint kind {self.kind!r}")
        if self.max_parallel < 1:
            raise InternalError("max_parallel must be >= 1")
        if self.retry_max_attempts < 1:
            raise InternalError("retry_max_attempts must be >= 1")


def configure_mock(script: MockScript | None = None, endpoint_id: str = "mock") -> EndpointConfig:
    return EndpointConfig(endpoint_id=endpoint_id, kind="mock", mock_script=script or MockScript())


@dataclass(frozen=True)
class BatchResult:
    """Per-index outcomes of complete_batch; failed indexes hold None."""

    responses: tuple[ChatResponse | None, ...]
    errors: dict[int, str]

    def require_all(self) -> tuple[ChatResponse, ...]:
        if self.errors:
            raise EndpointError(f"batch had {len(self.errors)} failed request(s): {sorted(self.errors)}")
        return self.responses  # type: ignore[return-value]


class Gateway:
    """Blocking completion client with bounded-parallel batching and a call log.

    Safe for concurrent use; the call log append is serialized.  Mock calls
    are logged exactly like HTTP attempts so call-count assertions hold under
    either endpoint kind.
    """

    def __init__(self, log_path: Path | None = None, transport: httpx.BaseTransport | None = None,
                 sleeper=time.sleep):
        self._log_lock = threading.Lock()
        self._log: list[dict[str, Any]] = []
        self._log_path = log_path
        self._transport = transport
        self._sleep = sleeper

    @property
    def log(self) -> list[dict[str, Any]]:
        with self._log_lock:
            return list(self._log)

    def call_count(self, tag_prefix: str = "") -> int:
        with self._log_lock:
            return sum(1 for entry in self._log if entry["request_tag"].startswith(tag_prefix))

    def _append_log(self, entry: dict[str, Any]) -> None:
        with self._log_lock:
            self._log.append(entry)
            if self._log_path is not None:
                with self._log_path.open("a", encoding="utf-8") as fh:
                    fh.write(canonical_dumps(entry) + "\n")

    def complete(self, request: ChatRequest, endpoint: EndpointConfig) -> ChatResponse:
        if endpoint.kind == "mock":
            return self._complete_mock(request, endpoint)
        return self._complete_remote(request, endpoint)

    def complete_batch(
        self,
        requests: list[ChatRequest],
        endpoint: EndpointConfig,
        max_parallel: int | None = None,
    ) -> BatchResult:
        if not requests:
            raise InternalError("complete_batch needs at least one request")
        workers = min(max_parallel or endpoint.max_parallel, len(requests))
        responses: list[ChatResponse | None] = [None] * len(requests)
        errors: dict[int, str] = {}

        def run_one(index: int) -> None:
            try:
                responses[index] = self.complete(requests[index], endpoint)
            except EndpointError as exc:
                errors[index] = str(exc)

        if workers == 1:
            for i in range(len(requests)):
                run_one(i)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run_one, range(len(requests))))
        if len(errors) == len(requests):
            summary = "; ".join(f"[{i}] {msg}" for i, msg in sorted(errors.items())[:5])
            raise EndpointError(f"all {len(requests)} batch requests failed: {summary}")
        return BatchResult(tuple(responses), errors)

    # -- mock ---------------------------------------------------------------

    def _complete_mock(self, request: ChatRequest, endpoint: EndpointConfig) -> ChatResponse:
        from .mockllm import resolve_mock_text

        script = endpoint.mock_script or MockScript()
        fingerprint = request_fingerprint(request)
        text = resolve_mock_text(request, fingerprint, script)
        response = ChatResponse(
            text=text,
            finish_reason="stop" if text else "error",
            prompt_tokens=sum(len(m.content) // 4 for m in request.messages),
            completion_tokens=len(text) // 4,
            latency_ms=0.0,
        )
        self._append_log(
            {
                "endpoint_id": endpoint.endpoint_id,
                "kind": "mock",
                "request_tag": request.request_tag,
                "fingerprint": fingerprint,
                "attempt": 1,
                "status": "ok",
                "finish_reason": "stop",
                "latency_ms": 0.0,
            }
        )
        return response

    # -- remote ---------------------------------------------------------------

    def _auth_headers(self, endpoint: EndpointConfig) -> dict[str, str]:
        if not endpoint.auth_env:
            return {}
        token = os.environ.get(endpoint.auth_env)
        if token is None:
            raise EndpointError(
                f"endpoint {endpoint.endpoint_id!r} needs auth variable {endpoint.auth_env!r}, "
                "which is not set"
            )
        return {"Authorization": f"Bearer {token}"}

    def _complete_remote(self, request: ChatRequest, endpoint: EndpointConfig) -> ChatResponse:
        headers = self._auth_headers(endpoint)
        if not endpoint.base_url:
            raise EndpointError(f"endpoint {endpoint.endpoint_id!r} has no base_url")
        fingerprint = request_fingerprint(request)
        body = {
            "model": endpoint.model_name,
            "messages": [m.as_dict() for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        if request.stop:
            body["stop"] = list(request.stop)
        url = endpoint.base_url.rstrip("/") + "/chat/completions"
        last_status: int | None = None
        last_error = "unknown error"
        for attempt in range(1, endpoint.retry_max_attempts + 1):
            started = time.monotonic()
            status: int | None = None
            try:
                with httpx.Client(transport=self._transport, timeout=endpoint.timeout_s) as client:
                    reply = client.post(url, json=body, headers=headers)
                status = reply.status_code
                latency_ms = (time.monotonic() - started) * 1000.0
                if status == 200:
                    response = self._parse_remote(reply.json(), latency_ms)
                    self._log_attempt(endpoint, request, fingerprint, attempt, "ok", status,
                                      latency_ms, response.finish_reason)
                    return response
                last_status = status
                last_error = f"HTTP {status}"
                self._log_attempt(endpoint, request, fingerprint, attempt, "error", status,
                                  latency_ms, None)
                if status not in RETRYABLE_STATUSES:
                    raise EndpointError(
                        f"endpoint {endpoint.endpoint_id!r} returned non-retryable {last_error}",
                        status=status,
                    )
            except httpx.HTTPError as exc:
                latency_ms = (time.monotonic() - started) * 1000.0
                last_error = f"transport error: {exc}"
                self._log_attempt(endpoint, request, fingerprint, attempt, "error", None,
                                  latency_ms, None)
            if attempt < endpoint.retry_max_attempts:
                self._sleep(endpoint.retry_base_backoff_ms * (2 ** (attempt - 1)) / 1000.0)
        raise EndpointError(
            f"endpoint {endpoint.endpoint_id!r} failed after {endpoint.retry_max_attempts} "
            f"attempt(s); last: {last_error}",
            status=last_status,
        )

    def _log_attempt(self, endpoint: EndpointConfig, request: ChatRequest, fingerprint: str,
                     attempt: int, status: str, http_status: int | None, latency_ms: float,
                     finish_reason: str | None) -> None:
        self._append_log(
            {
                "endpoint_id": endpoint.endpoint_id,
                "kind": "remote",
                "request_tag": request.request_tag,
                "fingerprint": fingerprint,
                "attempt": attempt,
                "status": status,
                "http_status": http_status,
                "finish_reason": finish_reason,
                "latency_ms": round(latency_ms, 3),
            }
        )

    @staticmethod
    def _parse_remote(payload: dict[str, Any], latency_ms: float) -> ChatResponse:
        try:
            choice = payload["choices"][0]
            text = choice["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise EndpointError(f"malformed completion payload: {exc}") from exc
        finish = choice.get("finish_reason") or "stop"
        if finish not in ("stop", "length"):
            finish = "stop"
        if not text:
            finish = "error"
        usage = payload.get("usage") or {}
        return ChatResponse(
            text=text,
            finish_reason=finish,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency_ms=round(latency_ms, 3),
        )
