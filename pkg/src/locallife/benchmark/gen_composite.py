"""Question generators for the three composite tasks.

Each question is built from held-out interactions: the target of the held-out
event is the correct option, and distractors are same-city merchants (or
their reviews) the user never touched.
"""

from __future__ import annotations

from datetime import datetime, timezone

from ..rng import SplitMix64, derive_seed
from .distractors import sample_distractors
from .qc import QCConfig
from .questions import GenContext

Draft = dict

SEARCH_FOLLOW_WINDOW_S = 2 * 3600


def _draft(stem, correct, distractors, source_ids, evidence=None) -> Draft:
    return {
        "stem": stem,
        "correct": correct,
        "distractors": distractors,
        "source_ids": source_ids,
        "evidence": evidence or {},
    }


def _profile_line(user) -> str:
    return "; ".join(f"{k}: {user.profile[k]}" for k in sorted(user.profile))


def _when(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m-%d %H:%M")


def _context_line(ctx: GenContext, city: str, timestamp: int) -> str:
    date = _when(timestamp)[:10]
    day = ctx.calendar_index.get((city, date))
    if day is None:
        return f"{_when(timestamp)} (no calendar entry)"
    holiday = "holiday" if day.is_holiday else "working day"
    return f"{_when(timestamp)}, {day.weather}, {day.season}, {holiday}"


def _behavior_line(ctx: GenContext, interaction) -> str:
    merchant = ctx.bundle.merchant(interaction.merchant_id)
    name = merchant.name if merchant else interaction.merchant_id
    suffix = f" (query: '{interaction.query}')" if interaction.query else ""
    return f"{_when(interaction.timestamp)} {interaction.action} at '{name}'{suffix}"


def _unvisited_merchants(ctx: GenContext, user_id: str, city: str) -> list:
    touched = {i.merchant_id for i in ctx.user_interactions.get(user_id, [])}
    return [m for m in ctx.merchants if m.city == city and m.merchant_id not in touched]


def gen_recommendation(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "recommendation"))
    name_to_id = {m.name: m.merchant_id for m in ctx.merchants}
    drafts: list[Draft] = []
    notes: list[str] = []
    for user in ctx.bundle.users:
        if len(drafts) >= n:
            break
        orders = ctx.user_orders.get(user.user_id, [])
        if len(orders) < 4:
            notes.append(f"{user.user_id}: fewer than 4 orders")
            continue
        held_out = orders[-1]
        target = ctx.bundle.merchant(held_out.merchant_id)
        if target is None:
            continue
        prior = [i for i in ctx.user_interactions[user.user_id]
                 if i.timestamp < held_out.timestamp][-5:]
        if not prior:
            continue
        unvisited = _unvisited_merchants(ctx, user.user_id, user.city)
        if len(unvisited) < 3:
            notes.append(f"{user.user_id}: too few never-visited merchants")
            continue
        distractors = sample_distractors(
            target.name, [m.name for m in unvisited], 3, rng.next_u64()
        )
        stem = (
            f"User profile: {_profile_line(user)}. Recent activity: "
            + "; ".join(_behavior_line(ctx, i) for i in prior)
            + f". Context: {_context_line(ctx, user.city, held_out.timestamp)}. "
            f"Which merchant will this user most likely consume from next?"
        )
        drafts.append(
            _draft(stem, target.name, distractors, [user.user_id, target.merchant_id],
                   {"held_out_timestamp": held_out.timestamp,
                    "option_merchant_ids": [name_to_id[x] for x in [target.name, *distractors]]})
        )
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: order history gates")
    return drafts, notes


def find_search_target(ctx: GenContext, search) -> object | None:
    """First click/order by the same user within the follow window after a search."""
    best = None
    for interaction in ctx.user_interactions.get(search.user_id, []):
        if interaction.action not in ("click", "order"):
            continue
        if not search.timestamp < interaction.timestamp <= search.timestamp + SEARCH_FOLLOW_WINDOW_S:
            continue
        key = (interaction.timestamp, interaction.merchant_id)
        if best is None or key < (best.timestamp, best.merchant_id):
            best = interaction
    return best


def gen_search(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "search"))
    name_to_id = {m.name: m.merchant_id for m in ctx.merchants}
    drafts: list[Draft] = []
    notes: list[str] = []
    searches = sorted(
        (i for i in ctx.bundle.interactions if i.action == "search" and i.query),
        key=lambda i: (i.timestamp, i.user_id, i.merchant_id),
    )
    for search in searches:
        if len(drafts) >= n:
            break
        user = ctx.bundle.user(search.user_id)
        if user is None:
            continue
        target_interaction = find_search_target(ctx, search)
        if target_interaction is None:
            notes.append(f"{search.user_id}@{search.timestamp}: no follow-up click")
            continue
        target = ctx.bundle.merchant(target_interaction.merchant_id)
        if target is None:
            continue
        unvisited = _unvisited_merchants(ctx, user.user_id, user.city)
        if len(unvisited) < 3:
            continue
        distractors = sample_distractors(
            target.name, [m.name for m in unvisited], 3, rng.next_u64()
        )
        stem = (
            f"User profile: {_profile_line(user)}. The user typed the ambiguous search "
            f"query '{search.query}'. Context: {_context_line(ctx, user.city, search.timestamp)}. "
            f"Which merchant will the user click?"
        )
        drafts.append(
            _draft(stem, target.name, distractors, [user.user_id, target.merchant_id],
                   {"search_timestamp": search.timestamp,
                    "option_merchant_ids": [name_to_id[x] for x in [target.name, *distractors]]})
        )
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: follow-up gates")
    return drafts, notes


def gen_content_marketing(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "content_marketing"))
    reviews_by_merchant: dict[str, list] = {}
    for review in ctx.bundle.reviews:
        reviews_by_merchant.setdefault(review.merchant_id, []).append(review)
    drafts: list[Draft] = []
    notes: list[str] = []
    for user in ctx.bundle.users:
        if len(drafts) >= n:
            break
        merchant_orders: dict[str, int] = {}
        for interaction in ctx.user_orders.get(user.user_id, []):
            merchant_orders[interaction.merchant_id] = merchant_orders.get(interaction.merchant_id, 0) + 1
        if not merchant_orders:
            continue
        ranked = sorted(merchant_orders.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            notes.append(f"{user.user_id}: top merchant is tied")
            continue
        top_merchant_id = ranked[0][0]
        candidate_reviews = reviews_by_merchant.get(top_merchant_id, [])
        if not candidate_reviews:
            notes.append(f"{user.user_id}: top merchant has no reviews")
            continue
        correct_review = candidate_reviews[rng.randbelow(len(candidate_reviews))]
        touched = {i.merchant_id for i in ctx.user_interactions.get(user.user_id, [])}
        foreign_reviews = [
            r for r in ctx.bundle.reviews
            if r.merchant_id not in touched and r.text != correct_review.text
        ]
        if len(foreign_reviews) < 3:
            continue
        distractors = sample_distractors(
            correct_review.text, [r.text for r in foreign_reviews], 3, rng.next_u64()
        )
        text_to_id = {r.text: r.review_id for r in ctx.bundle.reviews}
        stem = (
            f"User profile: {_profile_line(user)}. Which of these reviews would interest "
            f"this user the most?"
        )
        drafts.append(
            _draft(stem, correct_review.text, distractors,
                   [user.user_id, correct_review.review_id],
                   {"top_merchant_id": top_merchant_id,
                    "option_review_ids": [text_to_id[t] for t in
                                          [correct_review.text, *distractors]]})
        )
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: review coverage gates")
    return drafts, notes
