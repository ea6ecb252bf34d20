"""Question generators for the service-with-context tasks.

Trend questions join each merchant's daily order counts with the city
calendar; a question is emitted only when the statistical-sufficiency gate
passes and (for qualitative tasks) the seeded bootstrap calls a stable
direction.  Geography questions derive truth from coordinates and the
documented address convention.
"""

from __future__ import annotations

from ..rng import SplitMix64, derive_seed
from .distance import (
    DEFAULT_DISTANCE_EDGES_M,
    DISTANCE_BUCKET_LABELS,
    compute_distance,
    distance_bucket,
)
from .distractors import sample_distractors
from .qc import DaySample, QCConfig, check_stat_sufficiency, detect_stable_trend
from .questions import PERIOD_LABELS, GenContext, daily_pattern, order_hour, period_index
from .textconv import parse_address

Draft = dict

SEASON_ORDER = ("spring", "summer", "autumn", "winter")

# Relative-change buckets for the quantitative impact tasks; edges are the
# multiplicative change thresholds -25%, +25%, +150%.
RATIO_EDGES = (-0.25, 0.25, 1.5)
RATIO_EDGE_GUARD = 0.02


def _draft(stem, correct, distractors, source_ids, evidence=None) -> Draft:
    return {
        "stem": stem,
        "correct": correct,
        "distractors": distractors,
        "source_ids": source_ids,
        "evidence": evidence or {},
    }


def ratio_bucket(ratio: float) -> int:
    index = 0
    for edge in RATIO_EDGES:
        if ratio >= edge:
            index += 1
    return index


def ratio_labels(context_phrase: str) -> tuple[str, ...]:
    return (
        f"Consumption drops by more than 25% {context_phrase}",
        f"Consumption stays within 25% of usual {context_phrase}",
        f"Consumption rises by 25% to 150% {context_phrase}",
        f"Consumption rises by more than 150% {context_phrase}",
    )


def _weather_groups(ctx: GenContext, merchant) -> dict[str, list[DaySample]]:
    groups: dict[str, list[DaySample]] = {"rainy": [], "sunny": []}
    for day, count in ctx.day_values(merchant.merchant_id, merchant.city):
        if day.weather in groups:
            groups[day.weather].append(DaySample(day.weather, float(count), day.is_holiday))
    return groups


def top_two_seasons(ctx: GenContext, city: str) -> tuple[str, str] | None:
    counts: dict[str, int] = {}
    for day in ctx.calendar_by_city.get(city, []):
        counts[day.season] = counts.get(day.season, 0) + 1
    if len(counts) < 2:
        return None
    ranked = sorted(counts, key=lambda s: (-counts[s], SEASON_ORDER.index(s)))
    pair = sorted(ranked[:2], key=SEASON_ORDER.index)
    return pair[0], pair[1]


def _season_groups(ctx: GenContext, merchant, seasons: tuple[str, str]) -> dict[str, list[DaySample]]:
    groups: dict[str, list[DaySample]] = {seasons[0]: [], seasons[1]: []}
    for day, count in ctx.day_values(merchant.merchant_id, merchant.city):
        if day.season in groups:
            groups[day.season].append(DaySample(day.season, float(count), day.is_holiday))
    return groups


def _trend_evidence(groups: dict[str, list[DaySample]], verdict) -> dict:
    keys = sorted(groups)
    return {
        "group_days": {k: len(groups[k]) for k in keys},
        "group_means": {
            k: (sum(s.value for s in groups[k]) / len(groups[k]) if groups[k] else 0.0)
            for k in keys
        },
        "ci": [verdict.ci_low, verdict.ci_high] if verdict is not None else None,
    }


def gen_weather_impact_qualitative(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        groups = _weather_groups(ctx, merchant)
        sufficiency = check_stat_sufficiency(groups, qc)
        if not sufficiency.passed:
            notes.append(f"{merchant.merchant_id}: {'; '.join(sufficiency.clauses)}")
            continue
        verdict = detect_stable_trend(
            [s.value for s in groups["rainy"]],
            [s.value for s in groups["sunny"]],
            qc,
            derive_seed(seed, "trend", "weather", merchant.merchant_id),
        )
        if verdict.direction == "none":
            notes.append(f"{merchant.merchant_id}: no stable weather trend")
            continue
        increases = verdict.direction == "A_higher"
        correct = "Consumption increases on rainy days"
        wrong = "Consumption decreases on rainy days"
        if not increases:
            correct, wrong = wrong, correct
        stem = (
            f"Merchant description: \"{merchant.introduction}\". Based on observed demand, "
            f"how does rainy weather affect consumption at this merchant?"
        )
        drafts.append(_draft(stem, correct, [wrong], [merchant.merchant_id],
                             _trend_evidence(groups, verdict)))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: weather trend gates")
    return drafts, notes


def gen_weather_impact_quantitative(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    labels = ratio_labels("on rainy days")
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        groups = _weather_groups(ctx, merchant)
        sufficiency = check_stat_sufficiency(groups, qc)
        if not sufficiency.passed:
            continue
        sunny_mean = sum(s.value for s in groups["sunny"]) / len(groups["sunny"])
        rainy_mean = sum(s.value for s in groups["rainy"]) / len(groups["rainy"])
        if sunny_mean <= 0:
            continue
        ratio = rainy_mean / sunny_mean - 1.0
        if any(abs(ratio - edge) < RATIO_EDGE_GUARD for edge in RATIO_EDGES):
            continue
        bucket = ratio_bucket(ratio)
        stem = (
            f"Merchant description: \"{merchant.introduction}\". Quantitatively, how does "
            f"consumption at this merchant change on rainy days compared with sunny days?"
        )
        evidence = _trend_evidence(groups, None)
        evidence.update({"ratio": ratio, "edges": list(RATIO_EDGES)})
        drafts.append(_draft(stem, labels[bucket], [l for i, l in enumerate(labels) if i != bucket],
                             [merchant.merchant_id], evidence))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: sufficiency or edge guard")
    return drafts, notes


def gen_seasonal_impact_qualitative(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        seasons = top_two_seasons(ctx, merchant.city)
        if seasons is None:
            notes.append(f"{merchant.merchant_id}: calendar covers fewer than two seasons")
            continue
        groups = _season_groups(ctx, merchant, seasons)
        sufficiency = check_stat_sufficiency(groups, qc)
        if not sufficiency.passed:
            notes.append(f"{merchant.merchant_id}: {'; '.join(sufficiency.clauses)}")
            continue
        verdict = detect_stable_trend(
            [s.value for s in groups[seasons[0]]],
            [s.value for s in groups[seasons[1]]],
            qc,
            derive_seed(seed, "trend", "season", merchant.merchant_id),
        )
        if verdict.direction == "none":
            notes.append(f"{merchant.merchant_id}: no stable seasonal trend")
            continue
        first_higher = verdict.direction == "A_higher"
        correct = f"Consumption is higher in {seasons[0]} than in {seasons[1]}"
        wrong = f"Consumption is higher in {seasons[1]} than in {seasons[0]}"
        if not first_higher:
            correct, wrong = wrong, correct
        stem = (
            f"Merchant description: \"{merchant.introduction}\". Comparing {seasons[0]} "
            f"with {seasons[1]}, how does the season affect consumption at this merchant?"
        )
        evidence = _trend_evidence(groups, verdict)
        evidence["seasons"] = list(seasons)
        drafts.append(_draft(stem, correct, [wrong], [merchant.merchant_id], evidence))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: seasonal trend gates")
    return drafts, notes


def gen_seasonal_impact_quantitative(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        seasons = top_two_seasons(ctx, merchant.city)
        if seasons is None:
            continue
        groups = _season_groups(ctx, merchant, seasons)
        sufficiency = check_stat_sufficiency(groups, qc)
        if not sufficiency.passed:
            continue
        first_mean = sum(s.value for s in groups[seasons[0]]) / len(groups[seasons[0]])
        second_mean = sum(s.value for s in groups[seasons[1]]) / len(groups[seasons[1]])
        if second_mean <= 0:
            continue
        ratio = first_mean / second_mean - 1.0
        if any(abs(ratio - edge) < RATIO_EDGE_GUARD for edge in RATIO_EDGES):
            continue
        bucket = ratio_bucket(ratio)
        labels = ratio_labels(f"in {seasons[0]} compared with {seasons[1]}")
        stem = (
            f"Merchant description: \"{merchant.introduction}\". Quantitatively, how does "
            f"consumption change in {seasons[0]} compared with {seasons[1]}?"
        )
        evidence = _trend_evidence(groups, None)
        evidence.update({"ratio": ratio, "edges": list(RATIO_EDGES), "seasons": list(seasons)})
        drafts.append(_draft(stem, labels[bucket], [l for i, l in enumerate(labels) if i != bucket],
                             [merchant.merchant_id], evidence))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: sufficiency or edge guard")
    return drafts, notes


def _coords(merchant) -> tuple[float, float]:
    return (merchant.location.latitude, merchant.location.longitude)


def gen_nearest_merchant_selection(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "nearest_merchant_selection"))
    name_to_id = {m.name: m.merchant_id for m in ctx.merchants}
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        others = [m for m in ctx.merchants
                  if m.merchant_id != merchant.merchant_id and m.city == merchant.city]
        if len(others) < 4:
            continue
        ranked = sorted(
            ((compute_distance(_coords(merchant), _coords(m)), m) for m in others),
            key=lambda pair: (pair[0], pair[1].merchant_id),
        )
        nearest_dist, nearest = ranked[0]
        if ranked[1][0] - nearest_dist < 1.0:
            notes.append(f"{merchant.merchant_id}: nearest merchant not unique")
            continue
        farther = [m.name for d, m in ranked if d > nearest_dist + 1.0]
        if len(farther) < 3:
            continue
        distractors = sample_distractors(nearest.name, farther, 3, rng.next_u64())
        stem = (
            f"Merchant '{merchant.name}' is located at {merchant.location.address}. "
            f"Which of these merchants is nearest to it?"
        )
        drafts.append(_draft(stem, nearest.name, distractors, [merchant.merchant_id],
                             {"option_merchant_ids": [name_to_id[x] for x in
                                                      [nearest.name, *distractors]]}))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: tie guard or pool size")
    return drafts, notes


def gen_distance_estimation(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "distance_estimation"))
    drafts: list[Draft] = []
    notes: list[str] = []
    count = len(ctx.merchants)
    for index in range(n * 3):
        if len(drafts) >= n or count < 2:
            break
        a = ctx.merchants[rng.randbelow(count)]
        b = ctx.merchants[rng.randbelow(count)]
        if a.merchant_id == b.merchant_id:
            continue
        meters = compute_distance(_coords(a), _coords(b))
        # Skip pairs near a bucket edge so independent recomputation agrees.
        if any(abs(meters - edge) < 0.01 * edge for edge in DEFAULT_DISTANCE_EDGES_M):
            continue
        bucket = distance_bucket(meters)
        stem = (
            f"Merchant '{a.name}' is at {a.location.address}; merchant '{b.name}' is at "
            f"{b.location.address}. Roughly how far apart are the two merchants?"
        )
        drafts.append(
            _draft(stem, DISTANCE_BUCKET_LABELS[bucket],
                   [l for i, l in enumerate(DISTANCE_BUCKET_LABELS) if i != bucket],
                   [a.merchant_id, b.merchant_id],
                   {"meters": meters, "edges": list(DEFAULT_DISTANCE_EDGES_M)})
        )
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: edge guard")
    return drafts, notes


def gen_administrative_division(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "administrative_division"))
    districts = sorted({
        district for m in ctx.merchants
        for _, district in [parse_address(m.location.address)] if district
    })
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        _, district = parse_address(merchant.location.address)
        if district is None or len(districts) < 4:
            continue
        others = [m for m in ctx.merchants if m.merchant_id != merchant.merchant_id
                  and m.city == merchant.city]
        if not others:
            continue
        landmark = min(
            others,
            key=lambda m: (compute_distance(_coords(merchant), _coords(m)), m.merchant_id),
        )
        correct = f"{district} District"
        pool = [f"{d} District" for d in districts if d != district]
        stem = (
            f"Merchant '{merchant.name}' sits near the landmark '{landmark.name}'. "
            f"Which administrative district is this merchant in?"
        )
        drafts.append(_draft(stem, correct, sample_distractors(correct, pool, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: unparseable addresses")
    return drafts, notes


def gen_business_district_identification(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "business_district_identification"))
    all_bds = sorted({
        bd for m in ctx.merchants for bd, _ in [parse_address(m.location.address)] if bd
    })
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        business_district, _ = parse_address(merchant.location.address)
        if business_district is None:
            continue
        pool = [bd for bd in all_bds if bd != business_district]
        if len(pool) < 9:
            notes.append(f"{merchant.merchant_id}: only {len(pool)} alternative business districts")
            continue
        stem = f"In which business district is the merchant '{merchant.name}' located?"
        drafts.append(_draft(stem, business_district,
                             sample_distractors(business_district, pool, 9, rng.next_u64()),
                             [merchant.merchant_id]))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: business-district pool too small")
    return drafts, notes


def gen_operating_hours_prediction(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    rng = SplitMix64(derive_seed(seed, "task", "operating_hours_prediction"))
    patterns = sorted({daily_pattern(m) for m in ctx.merchants if daily_pattern(m)})
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        pattern = daily_pattern(merchant)
        pool = [p for p in patterns if p != pattern]
        if not pattern or len(pool) < 3:
            continue
        stem = (
            f"What are the most likely daily operating hours of merchant '{merchant.name}' "
            f"({merchant.leaf_category()})?"
        )
        drafts.append(_draft(stem, pattern, sample_distractors(pattern, pool, 3, rng.next_u64()),
                             [merchant.merchant_id]))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: too few distinct hour patterns")
    return drafts, notes


def gen_peak_hours_prediction(ctx: GenContext, qc: QCConfig, n: int, seed: int):
    drafts: list[Draft] = []
    notes: list[str] = []
    for merchant in ctx.merchants:
        if len(drafts) >= n:
            break
        counts = [0] * len(PERIOD_LABELS)
        for interaction in ctx.bundle.interactions:
            if interaction.action == "order" and interaction.merchant_id == merchant.merchant_id:
                counts[period_index(order_hour(interaction))] += 1
        ranked = sorted(range(len(counts)), key=lambda i: (-counts[i], i))
        if counts[ranked[0]] < counts[ranked[1]] + 2 or counts[ranked[0]] == 0:
            notes.append(f"{merchant.merchant_id}: no clear consumption peak")
            continue
        peak = ranked[0]
        stem = (
            f"Merchant description: \"{merchant.introduction}\". During which daypart does "
            f"this merchant see its daily consumption peak?"
        )
        drafts.append(_draft(stem, PERIOD_LABELS[peak],
                             [l for i, l in enumerate(PERIOD_LABELS) if i != peak],
                             [merchant.merchant_id], {"counts": counts}))
    if len(drafts) < n:
        notes.append(f"built {len(drafts)} of {n}: peak margin gate")
    return drafts, notes
