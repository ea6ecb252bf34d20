"""Question generators for the user-service-interaction tasks.

Preference tasks count real orders; review tasks accept a question only when
the annotator-consensus gate passes for the dimension they read.
"""

from __future__ import annotations

from ..rng import SplitMix64, derive_seed
from .distractors import sample_distractors
from .qc import QCConfig, gate_annotations
from .questions import NO, YES, GenContext

Draft = dict


def _draft(stem, correct, distractors, source_ids, evidence=None) -> Draft:
    return {
        "stem": stem,
        "correct": correct,
        "distractors": distractors,
        "source_ids": source_ids,
        "evidence": evidence or {},
    }


def _binary(stem, is_yes, source_ids, evidence=None) -> Draft:
    return _draft(stem, YES if is_yes else NO, [NO if is_yes else YES], source_ids, evidence)


def _profile_line(user) -> str:
    return "; ".join(f"{k}: {user.profile[k]}" for k in sorted(user.profile))


def _group_order_counts(ctx: GenContext, leaf: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for user_id, leaf_counts in ctx.user_leaf_counts.items():
        orders = leaf_counts.get(leaf, 0)
        if orders == 0:
            continue
        user = ctx.bundle.user(user_id)
        if user is None:
            continue
        group = user.profile.get("group")
        if group:
            counts[group] = counts.get(group, 0) + orders
    return counts


def gen_target_group_identification(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "target_group_identification"))
    all_groups = sorted({
        u.profile.get("group") for u in ctx.bundle.users if u.profile.get("group")
    })
    drafts: list[Draft] = []
    notes: list[str] = []
    index = 0
    while len(drafts) < n and index < n * 3:
        leaf = ctx.leaves[index % len(ctx.leaves)]
        index += 1
        counts = _group_order_counts(ctx, leaf)
        if not counts:
            continue
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > 1 and ranked[0][1] < ranked[1][1] + 3:
            notes.append(f"{leaf}: dominant group margin too small")
            continue
        correct = ranked[0][0]
        pool = [g for g in all_groups if counts.get(g, 0) * 2 <= ranked[0][1] and g != correct]
        if len(pool) < 3:
            continue
        stem = f"Which consumer group is the service category '{leaf}' most suitable for?"
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [], {"leaf": leaf, "group_orders": counts}))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: group dominance gates")
    return drafts, notes


def gen_user_preference_prediction(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "user_preference_prediction"))
    drafts: list[Draft] = []
    notes: list[str] = []
    for user in ctx.bundle.users:
        if len(drafts) >= n:
            break
        counts = ctx.user_leaf_counts.get(user.user_id, {})
        if not counts:
            continue
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > 1 and ranked[0][1] < ranked[1][1] + 2:
            notes.append(f"{user.user_id}: preferred category margin too small")
            continue
        correct = ranked[0][0]
        weak = [
            leaf for leaf in ctx.leaves
            if leaf != correct and counts.get(leaf, 0) * 4 <= ranked[0][1]
        ]
        if len(weak) < 3:
            continue
        stem = (
            f"A platform user has this profile: {_profile_line(user)}. Which service "
            f"category is this user most likely to consume?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, weak, 3, rng.next_u64()),
                             [user.user_id], {"leaf_orders": counts}))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: preference margin gates")
    return drafts, notes


def _count_distractors(correct: int) -> list[str]:
    candidates = [correct + 1, correct - 1, correct + 2, correct - 2, correct + 3]
    values = [v for v in candidates if v >= 0 and v != correct]
    out: list[int] = []
    for v in values:
        if v not in out:
            out.append(v)
        if len(out) == 3:
            break
    return [str(v) for v in out]


def gen_review_information_points(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    for review in ctx.bundle.reviews:
        if len(drafts) >= n:
            break
        verdict = gate_annotations("in_depth_content", review.annotations, qc)
        if not verdict.accepted:
            notes.append(f"{review.review_id}: {verdict.reason}")
            continue
        try:
            correct = int(verdict.label)
        except (TypeError, ValueError):
            notes.append(f"{review.review_id}: non-numeric depth label {verdict.label!r}")
            continue
        stem = (
            f"Review: \"{review.text}\". How many informative points does this review contain?"
        )
        drafts.append(_draft(stem, str(correct), _count_distractors(correct),
                             [review.review_id], {"label": verdict.label}))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: consensus gates")
    return drafts, notes


def _binary_review_generator(task_id: str, dimension: str, question: str):
    def generate(ctx: GenContext, qc: QCConfig, n: int, seed: int):
        drafts: list[Draft] = []
        notes: list[str] = []
        for review in ctx.bundle.reviews:
            if len(drafts) >= n:
                break
            verdict = gate_annotations(dimension, review.annotations, qc)
            if not verdict.accepted:
                notes.append(f"{review.review_id}: {verdict.reason}")
                continue
            if task_id == "review_real_examples":
                try:
                    is_yes = int(verdict.label) >= 1
                except (TypeError, ValueError):
                    continue
            else:
                if verdict.label not in ("yes", "no"):
                    notes.append(f"{review.review_id}: unexpected label {verdict.label!r}")
                    continue
                is_yes = verdict.label == "yes"
            stem = f"Review: \"{review.text}\". {question}"
            drafts.append(_binary(stem, is_yes, [review.review_id],
                                  {"dimension": dimension, "label": verdict.label}))
        if len(drafts) < n:
            notes.append(f"built {len(drafts)} of {n}: consensus gates")
        return drafts, notes

    return generate


gen_review_guidance_value = _binary_review_generator(
    "review_guidance_value", "actionable_suggestions",
    "Does this review provide actionable suggestions?",
)
gen_review_colloquialism = _binary_review_generator(
    "review_colloquialism", "natural_colloquial",
    "Does this review use natural, colloquial expressions?",
)
gen_review_real_examples = _binary_review_generator(
    "review_real_examples", "in_depth_content",
    "Does this review include real examples from an actual visit?",
)
gen_review_language_appeal = _binary_review_generator(
    "review_language_appeal", "credible_engaging",
    "Is the language of this review credible and engaging?",
)
gen_non_marketing_content = _binary_review_generator(
    "non_marketing_content", "non_promotional",
    "Is this review free of promotional content from the merchant?",
)
gen_human_written_content = _binary_review_generator(
    "human_written_content", "non_ai_generated",
    "Is this review human-written rather than AI-generated or padded?",
)
gen_overall_review_usefulness = _binary_review_generator(
    "overall_review_usefulness", "overall_usefulness",
    "Is this review useful overall for other customers?",
)
