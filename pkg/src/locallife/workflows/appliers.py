"""Offline batch appliers: merchant function tags, search-query suggestions,
and review-quality scorecards."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import EndpointError
from ..gateway import ChatRequest, EndpointConfig, Gateway, Message, request_fingerprint
from ..platform_data import MerchantRecord, ReviewRecord, Store
from ..prompts import agent_prompt, fill, render_input_block

MAX_TAGS = 10
MAX_TAG_WORDS = 10
MAX_ROUNDS = 3

SCALED_DIMENSIONS = (
    "in_depth_content",
    "actionable_suggestions",
    "natural_colloquial",
    "credible_engaging",
    "overall_usefulness",
)
BINARY_DIMENSIONS = ("non_promotional", "non_ai_generated")
ALL_DIMENSIONS = (
    "in_depth_content",
    "actionable_suggestions",
    "natural_colloquial",
    "credible_engaging",
    "non_promotional",
    "non_ai_generated",
    "overall_usefulness",
)


@dataclass(frozen=True)
class ApplierError:
    item_id: str
    reason: str
    last_output: str


@dataclass
class FunctionTagSet:
    merchant_id: str
    tags: list[str]
    fingerprint: str
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        return {
            "merchant_id": self.merchant_id,
            "tags": self.tags,
            "fingerprint": self.fingerprint,
            "warnings": self.warnings,
        }


@dataclass
class QuerySuggestionSet:
    item_id: str
    suggestions: list[dict[str, str]]  # {"query", "prefix"}
    fingerprint: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "suggestions": self.suggestions,
            "fingerprint": self.fingerprint,
        }


@dataclass
class ReviewScoreCard:
    review_id: str
    scores: dict[str, int]
    fingerprint: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "review_id": self.review_id,
            "scores": {d: self.scores[d] for d in ALL_DIMENSIONS},
            "fingerprint": self.fingerprint,
        }


def _attempt(user: str, round_no: int) -> str:
    return user if round_no == 1 else f"{user}\n\nAttempt token: {round_no}"


def _parse_tags(text: str) -> tuple[list[str], list[str]]:
    """(valid tags deduplicated, problems)."""
    raw = [part.strip() for chunk in text.splitlines() for part in chunk.split(";")]
    tags: list[str] = []
    seen: set[str] = set()
    problems: list[str] = []
    for tag in raw:
        if not tag:
            continue
        if len(tag.split()) > MAX_TAG_WORDS:
            problems.append(f"tag too long: {tag!r}")
            continue
        key = tag.casefold()
        if key in seen:
            continue
        seen.add(key)
        tags.append(tag)
    return tags, problems


def generate_function_tags(
    merchant: MerchantRecord,
    gateway: Gateway,
    endpoint: EndpointConfig,
) -> FunctionTagSet | ApplierError:
    system, user_template = agent_prompt("appliers", "function_tags")
    inputs = {
        "name": merchant.name,
        "category": merchant.leaf_category(),
        "introduction": merchant.introduction,
    }
    last_output = ""
    for round_no in range(1, MAX_ROUNDS + 1):
        user = _attempt(fill(user_template, input_block=render_input_block(inputs)), round_no)
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.0,
            max_output_tokens=256,
            request_tag="apply/function_tags",
        )
        try:
            response = gateway.complete(request, endpoint)
        except EndpointError as exc:
            return ApplierError(merchant.merchant_id, f"endpoint failure: {exc}", "")
        last_output = response.text
        tags, problems = _parse_tags(response.text)
        if not tags or problems:
            continue
        warnings = []
        if len(tags) > MAX_TAGS:
            warnings.append(f"model returned {len(tags)} tags; truncated to {MAX_TAGS}")
            tags = tags[:MAX_TAGS]
        return FunctionTagSet(merchant.merchant_id, tags, request_fingerprint(request), warnings)
    return ApplierError(merchant.merchant_id, f"no valid tags after {MAX_ROUNDS} attempts",
                        last_output)


def shortest_unique_prefix(query: str, others: list[str]) -> str:
    """Shortest prefix of ``query`` that no other suggestion starts with; the
    full text when every prefix stays ambiguous."""
    for length in range(1, len(query) + 1):
        prefix = query[:length]
        if not any(other.startswith(prefix) for other in others):
            return prefix
    return query


def generate_query_suggestions(
    item_id: str,
    fields: dict[str, str],
    gateway: Gateway,
    endpoint: EndpointConfig,
) -> QuerySuggestionSet | ApplierError:
    system, user_template = agent_prompt("appliers", "query_suggestions")
    last_output = ""
    for round_no in range(1, MAX_ROUNDS + 1):
        user = _attempt(fill(user_template, input_block=render_input_block(fields)), round_no)
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.0,
            max_output_tokens=256,
            request_tag="apply/query_suggestions",
        )
        try:
            response = gateway.complete(request, endpoint)
        except EndpointError as exc:
            return ApplierError(item_id, f"endpoint failure: {exc}", "")
        last_output = response.text
        queries: list[str] = []
        for line in response.text.splitlines():
            query = line.strip().strip("-• ").lower()
            if query and query not in queries:
                queries.append(query)
        if not queries:
            continue
        suggestions = [
            {"query": q, "prefix": shortest_unique_prefix(q, [o for o in queries if o != q])}
            for q in queries
        ]
        return QuerySuggestionSet(item_id, suggestions, request_fingerprint(request))
    return ApplierError(item_id, f"no suggestions after {MAX_ROUNDS} attempts", last_output)


def _parse_scorecard(text: str) -> dict[str, int] | None:
    scores: dict[str, int] = {}
    for line in text.splitlines():
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        key = key.strip().casefold().replace(" ", "_")
        if key not in ALL_DIMENSIONS:
            continue
        try:
            scores[key] = int(value.strip())
        except ValueError:
            return None
    if set(scores) != set(ALL_DIMENSIONS):
        return None
    for dim in SCALED_DIMENSIONS:
        if not 0 <= scores[dim] <= 5:
            return None
    for dim in BINARY_DIMENSIONS:
        if scores[dim] not in (0, 1):
            return None
    return scores


def score_review_dimensions(
    review: ReviewRecord,
    gateway: Gateway,
    endpoint: EndpointConfig,
) -> ReviewScoreCard | ApplierError:
    system, user_template = agent_prompt("appliers", "review_scores")
    last_output = ""
    for round_no in range(1, MAX_ROUNDS + 1):
        user = _attempt(fill(user_template, review_text=review.text), round_no)
        request = ChatRequest(
            messages=(Message("system", system), Message("user", user)),
            temperature=0.0,
            max_output_tokens=256,
            request_tag="apply/review_scores",
        )
        try:
            response = gateway.complete(request, endpoint)
        except EndpointError as exc:
            return ApplierError(review.review_id, f"endpoint failure: {exc}", "")
        last_output = response.text
        scores = _parse_scorecard(response.text)
        if scores is not None:
            return ReviewScoreCard(review.review_id, scores, request_fingerprint(request))
    return ApplierError(review.review_id, f"unparseable scorecard after {MAX_ROUNDS} attempts",
                        last_output)


def apply_over_store(
    kind: str,
    store: Store,
    gateway: Gateway,
    endpoint: EndpointConfig,
) -> tuple[list[dict[str, Any]], list[ApplierError]]:
    """Run one applier over every record; per-item errors never stop the batch."""
    results: list[dict[str, Any]] = []
    errors: list[ApplierError] = []
    for record in store:
        if kind == "tags":
            outcome = generate_function_tags(record, gateway, endpoint)
        elif kind == "queries":
            fields = {"name": record.name, "category": record.leaf_category(),
                      "introduction": record.introduction}
            outcome = generate_query_suggestions(record.merchant_id, fields, gateway, endpoint)
        elif kind == "review-scores":
            outcome = score_review_dimensions(record, gateway, endpoint)
        else:
            raise ValueError(f"unknown applier kind {kind!r}")
        if isinstance(outcome, ApplierError):
            errors.append(outcome)
        else:
            results.append(outcome.as_dict())
    return results, errors
