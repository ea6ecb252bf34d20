"""Brute-force recomputation of every question's correct answer.

This module re-derives ground truth directly from the store bundle using its
own parsing, distance, and counting code, kept deliberately separate from the
generator implementations so that a bug in either side surfaces as a
disagreement.  ``verify_ground_truth`` returns one message per mismatch; an
empty list certifies the build.
"""

from __future__ import annotations

import math
import re
from datetime import datetime, timezone
from typing import Any

from ..platform_data import MerchantRecord, StoreBundle
from .qc import QCConfig

_KV_RE = re.compile(r"([a-z_][a-z0-9_ ]{0,30}?):\s*")

_BUCKET_PHRASES = (
    "drops by more than 25%",
    "stays within 25%",
    "rises by 25% to 150%",
    "rises by more than 150%",
)
_DISTANCE_PHRASES = (
    "Less than 500 m",
    "Between 500 m and 1 km",
    "Between 1 km and 3 km",
    "More than 3 km",
)
_PERIODS = (("morning", 6, 11), ("midday", 11, 14), ("afternoon", 14, 17),
            ("evening", 17, 22), ("night", 22, 30))

_REVIEW_DIMENSION_BY_TASK = {
    "review_guidance_value": "actionable_suggestions",
    "review_colloquialism": "natural_colloquial",
    "review_real_examples": "in_depth_content",
    "review_language_appeal": "credible_engaging",
    "non_marketing_content": "non_promotional",
    "human_written_content": "non_ai_generated",
    "overall_review_usefulness": "overall_usefulness",
}


def _attrs(text: str) -> dict[str, str]:
    # Independent reading of the "key: value; key: value" convention: split on
    # segment separators first, then on the first colon.
    attrs: dict[str, str] = {}
    for sentence in re.split(r"[.;]", text):
        if ":" not in sentence:
            continue
        key, _, value = sentence.partition(":")
        key = key.strip()
        value = value.strip()
        if _KV_RE.fullmatch(key + ": ") and value and key not in attrs:
            attrs[key] = value
    return attrs


def _norm(value: str) -> str:
    return " ".join(value.casefold().strip(" .,!?").split())


def _tokens(value: str) -> frozenset[str]:
    return frozenset(_norm(value).split())


def _price_of(merchant: MerchantRecord) -> int | None:
    value = _attrs(merchant.introduction).get("price")
    if value is None:
        return None
    match = re.search(r"\d+", value)
    return int(match.group(0)) if match else None


def _haversine(a: tuple[float, float], b: tuple[float, float]) -> float:
    # Alternative great-circle formulation (atan2 form), same 6371 km sphere.
    lat1, lon1, lat2, lon2 = map(math.radians, (*a, *b))
    s = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 6_371_000.0 * 2.0 * math.atan2(math.sqrt(s), math.sqrt(1.0 - s))


def _merchant_by_name(bundle: StoreBundle, name: str) -> MerchantRecord | None:
    found = [m for m in bundle.merchants if m.name == name]
    return found[0] if len(found) == 1 else None


def _order_day_counts(bundle: StoreBundle, merchant_id: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in bundle.interactions:
        if i.action == "order" and i.merchant_id == merchant_id:
            day = datetime.fromtimestamp(i.timestamp, tz=timezone.utc).date().isoformat()
            counts[day] = counts.get(day, 0) + 1
    return counts


def _weather_means(bundle: StoreBundle, merchant: MerchantRecord) -> tuple[float, float]:
    per_day = _order_day_counts(bundle, merchant.merchant_id)
    rainy, sunny = [], []
    for day in bundle.calendar:
        if day.city != merchant.city:
            continue
        value = float(per_day.get(day.date, 0))
        if day.weather == "rainy":
            rainy.append(value)
        elif day.weather == "sunny":
            sunny.append(value)
    return (sum(rainy) / len(rainy) if rainy else 0.0,
            sum(sunny) / len(sunny) if sunny else 0.0)


def _season_means(bundle: StoreBundle, merchant: MerchantRecord,
                  seasons: list[str]) -> tuple[float, float]:
    per_day = _order_day_counts(bundle, merchant.merchant_id)
    groups: dict[str, list[float]] = {seasons[0]: [], seasons[1]: []}
    for day in bundle.calendar:
        if day.city == merchant.city and day.season in groups:
            groups[day.season].append(float(per_day.get(day.date, 0)))
    first, second = groups[seasons[0]], groups[seasons[1]]
    return (sum(first) / len(first) if first else 0.0,
            sum(second) / len(second) if second else 0.0)


def _ratio_bucket(ratio: float, edges: list[float]) -> int:
    return sum(1 for edge in edges if ratio >= edge)


def _consensus(bundle: StoreBundle, review_id: str, dimension: str, qc: QCConfig) -> str | None:
    review = bundle.review(review_id)
    if review is None:
        return None
    labels = [a.label for a in review.annotations if a.dimension == dimension]
    if len(labels) < qc.min_annotators or len(set(labels)) != 1:
        return None
    return labels[0]


def _user_leaf_counts(bundle: StoreBundle, user_id: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in bundle.interactions:
        if i.action == "order" and i.user_id == user_id:
            merchant = bundle.merchant(i.merchant_id)
            if merchant is not None:
                leaf = merchant.category_path[-1]
                counts[leaf] = counts.get(leaf, 0) + 1
    return counts


def _touched_merchants(bundle: StoreBundle, user_id: str) -> set[str]:
    return {i.merchant_id for i in bundle.interactions if i.user_id == user_id}


def _check(question: dict[str, Any], bundle: StoreBundle, qc: QCConfig) -> str | None:
    task_id = question["task_id"]
    options = question["options"]
    answer = options[question["correct_index"]]
    wrong = [o for i, o in enumerate(options) if i != question["correct_index"]]
    source_ids = question["construction"]["source_ids"]
    evidence = question["construction"]["evidence"]

    def fail(message: str) -> str:
        return f"{question['question_id']}: {message}"

    if task_id == "category_prediction":
        merchant = bundle.merchant(source_ids[0])
        if merchant.category_path[-1] != answer:
            return fail(f"category {merchant.category_path[-1]!r} != answer {answer!r}")

    elif task_id == "attribute_mining":
        attrs = _attrs(bundle.merchant(source_ids[0]).introduction)
        if answer not in attrs:
            return fail(f"answer key {answer!r} not among attributes {sorted(attrs)}")
        present = [o for o in wrong if o in attrs]
        if present:
            return fail(f"distractor keys {present} actually apply")

    elif task_id == "attribute_value_extraction":
        attrs = _attrs(bundle.merchant(source_ids[0]).introduction)
        if attrs.get(evidence["key"]) != answer:
            return fail(f"value for {evidence['key']!r} is {attrs.get(evidence['key'])!r}")

    elif task_id == "multilevel_category_prediction":
        merchant = bundle.merchant(source_ids[0])
        if " > ".join(merchant.category_path) != answer:
            return fail("full category path mismatch")

    elif task_id == "category_merchant_selection":
        leaf = evidence["leaf"]
        chosen = _merchant_by_name(bundle, answer)
        if chosen is None or chosen.category_path[-1] != leaf:
            return fail(f"answer merchant not in category {leaf!r}")
        for name in wrong:
            other = _merchant_by_name(bundle, name)
            if other is None or other.category_path[-1] == leaf:
                return fail(f"distractor {name!r} is in category {leaf!r}")

    elif task_id == "attribute_category_selection":
        key = evidence["key"]
        with_key = {m.category_path[-1] for m in bundle.merchants if key in _attrs(m.introduction)}
        if answer not in with_key:
            return fail(f"no merchant in {answer!r} has attribute {key!r}")
        bad = [o for o in wrong if o in with_key]
        if bad:
            return fail(f"distractor categories {bad} do have {key!r}")

    elif task_id == "same_category_judgment":
        a = bundle.merchant(source_ids[0])
        b = bundle.merchant(source_ids[1])
        expected = "Yes" if a.category_path[-1] == b.category_path[-1] else "No"
        if answer != expected:
            return fail(f"expected {expected}")

    elif task_id == "same_category_selection":
        base = bundle.merchant(source_ids[0])
        chosen = _merchant_by_name(bundle, answer)
        if chosen is None or chosen.category_path[-1] != base.category_path[-1]:
            return fail("answer merchant not in the same category")
        for name in wrong:
            other = _merchant_by_name(bundle, name)
            if other is not None and other.category_path[-1] == base.category_path[-1]:
                return fail(f"distractor {name!r} shares the category")

    elif task_id == "attribute_value_reasonableness":
        attrs = _attrs(bundle.merchant(source_ids[0]).introduction)
        truth = attrs.get(evidence["key"]) == evidence["value"]
        if answer != ("Yes" if truth else "No"):
            return fail(f"claim truth is {truth}")

    elif task_id == "attribute_value_identification":
        attrs = _attrs(bundle.merchant(source_ids[0]).introduction)
        holders = [k for k, v in attrs.items() if v == evidence["value"]]
        if holders != [answer]:
            return fail(f"value {evidence['value']!r} identifies {holders}")

    elif task_id == "attribute_value_synonym":
        truth = _norm(evidence["a"]) == _norm(evidence["b"])
        if answer != ("Yes" if truth else "No"):
            return fail(f"synonym truth is {truth}")

    elif task_id == "attribute_value_containment":
        ta, tb = _tokens(evidence["a"]), _tokens(evidence["b"])
        truth = (ta < tb) or (tb < ta)
        if answer != ("Yes" if truth else "No"):
            return fail(f"containment truth is {truth}")

    elif task_id == "attribute_compatibility":
        k1, v1, k2, v2 = evidence["k1"], evidence["v1"], evidence["k2"], evidence["v2"]
        truth = any(
            _attrs(m.introduction).get(k1) == v1 and _attrs(m.introduction).get(k2) == v2
            for m in bundle.merchants
        )
        if answer != ("Yes" if truth else "No"):
            return fail(f"compatibility truth is {truth}")

    elif task_id == "mathematical_operations":
        prices = [_price_of(bundle.merchant(mid)) for mid in evidence["merchant_ids"]]
        if any(p is None for p in prices):
            return fail("price missing on a source merchant")
        if evidence["op"] == "sum":
            expected = prices[0] + prices[1]
        elif evidence["op"] == "difference":
            expected = abs(prices[0] - prices[1])
        else:
            expected = prices[0] * evidence["k"]
        if str(expected) != answer:
            return fail(f"arithmetic gives {expected}")

    elif task_id == "function_tag_prediction":
        attrs = _attrs(bundle.merchant(source_ids[0]).introduction)
        if attrs.get("function") != answer:
            return fail(f"function tag is {attrs.get('function')!r}")

    elif task_id == "brand_positioning":
        subject, other = evidence["brands"]
        means = {}
        for brand in (subject, other):
            prices = [
                _price_of(m) for m in bundle.merchants
                if m.brand == brand and _price_of(m) is not None
            ]
            if not prices:
                return fail(f"brand {brand!r} has no priced merchants")
            means[brand] = sum(prices) / len(prices)
        truth = means[subject] > means[other]
        if answer != ("Yes" if truth else "No"):
            return fail(f"premium truth is {truth} ({means})")

    elif task_id == "brand_similarity":
        base = evidence["brand"]
        cats: dict[str, set[str]] = {}
        for m in bundle.merchants:
            if m.brand:
                cats.setdefault(m.brand, set()).add(m.category_path[-1])
        overlaps = {b: len(cats[base] & c) for b, c in cats.items() if b != base}
        best = max(overlaps.values())
        winners = [b for b, v in overlaps.items() if v == best]
        if winners != [answer]:
            return fail(f"most similar brand is {winners}")
        if any(overlaps[o] >= best for o in wrong):
            return fail("a distractor brand ties the best overlap")

    elif task_id == "category_complementarity":
        target = evidence["leaf"]
        co: dict[str, int] = {}
        user_ids = {i.user_id for i in bundle.interactions if i.action == "order"}
        for user_id in user_ids:
            leaves = {leaf for leaf, c in _user_leaf_counts(bundle, user_id).items() if c > 0}
            if target in leaves:
                for leaf in leaves - {target}:
                    co[leaf] = co.get(leaf, 0) + 1
        best = max(co.values())
        winners = [leaf for leaf, v in co.items() if v == best]
        if winners != [answer]:
            return fail(f"most complementary is {winners}")
        if any(co.get(o, 0) >= best for o in wrong):
            return fail("a distractor category ties the best co-count")

    elif task_id == "weather_impact_qualitative":
        merchant = bundle.merchant(source_ids[0])
        rainy_mean, sunny_mean = _weather_means(bundle, merchant)
        if rainy_mean == sunny_mean:
            return fail("no mean difference between rainy and sunny")
        expected_increase = rainy_mean > sunny_mean
        if ("increases" in answer) != expected_increase:
            return fail(f"rainy {rainy_mean:.3f} vs sunny {sunny_mean:.3f}")

    elif task_id == "weather_impact_quantitative":
        merchant = bundle.merchant(source_ids[0])
        rainy_mean, sunny_mean = _weather_means(bundle, merchant)
        if sunny_mean <= 0:
            return fail("sunny mean not positive")
        bucket = _ratio_bucket(rainy_mean / sunny_mean - 1.0, evidence["edges"])
        if _BUCKET_PHRASES[bucket] not in answer:
            return fail(f"bucket {bucket} expected")

    elif task_id == "seasonal_impact_qualitative":
        merchant = bundle.merchant(source_ids[0])
        seasons = evidence["seasons"]
        first_mean, second_mean = _season_means(bundle, merchant, seasons)
        if first_mean == second_mean:
            return fail("no seasonal mean difference")
        higher = seasons[0] if first_mean > second_mean else seasons[1]
        if not answer.startswith(f"Consumption is higher in {higher}"):
            return fail(f"higher season is {higher}")

    elif task_id == "seasonal_impact_quantitative":
        merchant = bundle.merchant(source_ids[0])
        seasons = evidence["seasons"]
        first_mean, second_mean = _season_means(bundle, merchant, seasons)
        if second_mean <= 0:
            return fail("second season mean not positive")
        bucket = _ratio_bucket(first_mean / second_mean - 1.0, evidence["edges"])
        if _BUCKET_PHRASES[bucket] not in answer:
            return fail(f"bucket {bucket} expected")

    elif task_id == "nearest_merchant_selection":
        base = bundle.merchant(source_ids[0])
        origin = (base.location.latitude, base.location.longitude)
        ranked = sorted(
            (
                (_haversine(origin, (m.location.latitude, m.location.longitude)), m)
                for m in bundle.merchants
                if m.merchant_id != base.merchant_id and m.city == base.city
            ),
            key=lambda pair: (pair[0], pair[1].merchant_id),
        )
        if ranked[0][1].name != answer:
            return fail(f"nearest is {ranked[0][1].name!r}")

    elif task_id == "distance_estimation":
        a = bundle.merchant(source_ids[0])
        b = bundle.merchant(source_ids[1])
        meters = _haversine(
            (a.location.latitude, a.location.longitude),
            (b.location.latitude, b.location.longitude),
        )
        bucket = sum(1 for edge in evidence["edges"] if meters >= edge)
        if _DISTANCE_PHRASES[bucket] != answer:
            return fail(f"distance {meters:.1f} m lands in bucket {bucket}")

    elif task_id == "administrative_division":
        address = bundle.merchant(source_ids[0]).location.address
        segments = [p.strip() for p in address.split(",") if p.strip().endswith(" District")]
        if not segments or segments[0] != answer:
            return fail(f"address district is {segments}")

    elif task_id == "business_district_identification":
        address = bundle.merchant(source_ids[0]).location.address
        first = address.split(",")[0].strip()
        if first != answer:
            return fail(f"business district is {first!r}")

    elif task_id == "operating_hours_prediction":
        merchant = bundle.merchant(source_ids[0])
        parts = []
        for h in merchant.operating_hours:
            if h.weekday == 0:
                parts.append(
                    f"{h.open_minute // 60:02d}:{h.open_minute % 60:02d}-"
                    f"{h.close_minute // 60:02d}:{h.close_minute % 60:02d}"
                )
        if " & ".join(parts) != answer:
            return fail(f"rendered hours {' & '.join(parts)!r}")

    elif task_id == "peak_hours_prediction":
        merchant = bundle.merchant(source_ids[0])
        counts = [0] * len(_PERIODS)
        for i in bundle.interactions:
            if i.action != "order" or i.merchant_id != merchant.merchant_id:
                continue
            hour = datetime.fromtimestamp(i.timestamp, tz=timezone.utc).hour
            for index, (_, start, end) in enumerate(_PERIODS):
                if (start <= hour < end) if end <= 24 else (hour >= start or hour < end % 24):
                    counts[index] += 1
                    break
        best = max(range(len(counts)), key=lambda i: (counts[i], -i))
        if not answer.startswith(_PERIODS[best][0]):
            return fail(f"peak period is {_PERIODS[best][0]}")

    elif task_id == "target_group_identification":
        leaf = evidence["leaf"]
        group_orders: dict[str, int] = {}
        for i in bundle.interactions:
            if i.action != "order":
                continue
            merchant = bundle.merchant(i.merchant_id)
            user = bundle.user(i.user_id)
            if merchant is None or user is None or merchant.category_path[-1] != leaf:
                continue
            group = user.profile.get("group")
            if group:
                group_orders[group] = group_orders.get(group, 0) + 1
        best = max(group_orders.values())
        winners = [g for g, v in group_orders.items() if v == best]
        if winners != [answer]:
            return fail(f"dominant group is {winners}")
        if any(group_orders.get(o, 0) >= best for o in wrong):
            return fail("a distractor group ties the dominant count")

    elif task_id == "user_preference_prediction":
        counts = _user_leaf_counts(bundle, source_ids[0])
        best = max(counts.values())
        winners = [leaf for leaf, v in counts.items() if v == best]
        if winners != [answer]:
            return fail(f"preferred category is {winners}")
        if any(counts.get(o, 0) >= best for o in wrong):
            return fail("a distractor category ties the preference count")

    elif task_id == "review_information_points":
        label = _consensus(bundle, source_ids[0], "in_depth_content", qc)
        if label is None or str(int(label)) != answer:
            return fail(f"consensus depth label is {label!r}")

    elif task_id in _REVIEW_DIMENSION_BY_TASK:
        dimension = _REVIEW_DIMENSION_BY_TASK[task_id]
        label = _consensus(bundle, source_ids[0], dimension, qc)
        if label is None:
            return fail(f"no consensus on {dimension}")
        if task_id == "review_real_examples":
            expected = "Yes" if int(label) >= 1 else "No"
        else:
            expected = "Yes" if label == "yes" else "No"
        if answer != expected:
            return fail(f"consensus {dimension} = {label!r}")

    elif task_id == "recommendation":
        user_id = source_ids[0]
        orders = sorted(
            (i for i in bundle.interactions if i.action == "order" and i.user_id == user_id),
            key=lambda i: (i.timestamp, i.merchant_id),
        )
        target = bundle.merchant(orders[-1].merchant_id)
        if target is None or target.name != answer:
            return fail(f"held-out order is at {target.name if target else '?'!r}")
        touched = _touched_merchants(bundle, user_id)
        for name in wrong:
            other = _merchant_by_name(bundle, name)
            if other is not None and other.merchant_id in touched:
                return fail(f"distractor {name!r} was visited by the user")

    elif task_id == "search":
        user_id = source_ids[0]
        search_ts = evidence["search_timestamp"]
        followups = [
            i for i in bundle.interactions
            if i.user_id == user_id and i.action in ("click", "order")
            and search_ts < i.timestamp <= search_ts + 2 * 3600
        ]
        if not followups:
            return fail("no follow-up interaction found")
        first = min(followups, key=lambda i: (i.timestamp, i.merchant_id))
        target = bundle.merchant(first.merchant_id)
        if target is None or target.name != answer:
            return fail(f"clicked merchant is {target.name if target else '?'!r}")
        touched = _touched_merchants(bundle, user_id)
        for name in wrong:
            other = _merchant_by_name(bundle, name)
            if other is not None and other.merchant_id in touched:
                return fail(f"distractor {name!r} was visited by the user")

    elif task_id == "content_marketing":
        user_id = source_ids[0]
        per_merchant: dict[str, int] = {}
        for i in bundle.interactions:
            if i.action == "order" and i.user_id == user_id:
                per_merchant[i.merchant_id] = per_merchant.get(i.merchant_id, 0) + 1
        best = max(per_merchant.values())
        winners = [m for m, v in per_merchant.items() if v == best]
        if len(winners) != 1:
            return fail("top merchant tied")
        correct_review = next((r for r in bundle.reviews if r.text == answer), None)
        if correct_review is None or correct_review.merchant_id != winners[0]:
            return fail(f"answer review is not about top merchant {winners[0]}")
        touched = _touched_merchants(bundle, user_id)
        for text in wrong:
            review = next((r for r in bundle.reviews if r.text == text), None)
            if review is not None and review.merchant_id in touched:
                return fail("a distractor review covers a visited merchant")

    else:
        return fail(f"no oracle for task {task_id!r}")
    return None


def verify_ground_truth(
    questions: list[dict[str, Any]], bundle: StoreBundle, qc: QCConfig | None = None
) -> list[str]:
    qc = qc or QCConfig()
    mismatches = []
    for question in questions:
        message = _check(question, bundle, qc)
        if message is not None:
            mismatches.append(message)
    return mismatches
