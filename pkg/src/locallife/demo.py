"""Deterministic synthetic-city data writer.

Produces a full set of raw JSONL store files (merchants, users, interactions,
reviews, calendar) whose statistical structure is engineered rather than
random: weather- and season-sensitive order rates, per-category peak hours,
brand price tiers, parseable attribute strings, and annotated reviews.  The
same (seed, scale) always writes byte-identical files, which makes this the
fixture substrate for tests and the quickstart dataset for the CLI.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from .platform_data.records import season_for_date
from .rng import SplitMix64, derive_seed

WEATHER_CYCLE = ("sunny", "rainy", "other")
GROUPS = ("students", "families", "office workers", "retirees")
AGE_BANDS = ("20s", "30s", "40s", "50s", "60s")
DISTRICTS = ("North", "South", "East", "West")
BUSINESS_DISTRICTS = (
    "Harbor Plaza", "Old Mill Yard", "Cedar Market", "Union Square", "Maple Court",
    "River Walk", "Sunset Arcade", "Granite Row", "Willow Lane Hub", "Fountain Cross",
    "North Gate Mall", "Lantern Alley", "Pearl Docks", "Copper Works",
)
NAME_ADJECTIVES = ("Golden", "Lucky", "Riverside", "Imperial", "Breezy", "Cozy", "Grand", "Silver")
NAME_SUFFIXES = ("House", "Studio", "Corner", "Hall", "Works")
FUNCTIONS = ("family outing", "date night", "quick lunch", "group dinner",
             "team building", "solo relaxation")

# Daypart buckets shared with the benchmark's peak-hours task.
PERIODS = (
    ("morning", 6, 11),
    ("midday", 11, 14),
    ("afternoon", 14, 17),
    ("evening", 17, 22),
    ("night", 22, 30),   # 22:00 .. 06:00 next day, expressed as wrapped hours
)

_OPTIONAL_VALUES = {
    "wifi": ("free wifi", "paid wifi", "wifi"),
    "parking": ("street parking", "valet parking", "parking"),
    "pets": ("pets allowed", "small pets allowed"),
    "delivery": ("delivery available", "fast delivery available"),
    "takeout": ("takeout available", "boxed takeout available"),
}


@dataclass(frozen=True)
class LeafSpec:
    path: tuple[str, str]
    peak: str
    rainy_mult: float
    summer_mult: float
    winter_mult: float
    companion: str          # leaf category frequently co-consumed by the same users
    optional_attrs: tuple[str, ...]
    flavor: str


LEAVES = (
    LeafSpec(("Food", "Hotpot"), "evening", 1.0, 0.4, 2.0, "KTV", ("wifi", "parking"),
             "Bubbling broth tables and late dinners"),
    LeafSpec(("Food", "Delivery Noodles"), "midday", 2.0, 1.0, 1.0, "Cinema", ("delivery", "takeout"),
             "Hand-pulled noodles packed for couriers"),
    LeafSpec(("Food", "Bakery"), "morning", 1.0, 1.0, 1.0, "Spa", ("takeout", "wifi"),
             "Fresh loaves and morning pastries"),
    LeafSpec(("Food", "Sichuan"), "evening", 1.0, 1.0, 1.0, "KTV", ("parking", "delivery"),
             "Pepper-forward classics served family style"),
    LeafSpec(("Food", "Ice Cream"), "afternoon", 0.4, 3.0, 0.3, "Cinema", ("takeout",),
             "Small-batch scoops and sorbets"),
    LeafSpec(("Beauty", "Spa"), "afternoon", 1.0, 1.0, 1.0, "Bakery", ("pets", "wifi"),
             "Quiet rooms and long soaks"),
    LeafSpec(("Beauty", "Hair Salon"), "afternoon", 1.0, 1.0, 1.0, "Spa", ("wifi",),
             "Walk-in cuts and coloring"),
    LeafSpec(("Entertainment", "KTV"), "night", 0.4, 1.0, 1.0, "Hotpot", ("parking", "wifi"),
             "Private singing rooms with snack service"),
    LeafSpec(("Entertainment", "Cinema"), "evening", 2.0, 1.0, 1.0, "Ice Cream", ("parking",),
             "Screenings from noon to midnight"),
    LeafSpec(("Education", "Tutoring"), "morning", 1.0, 1.0, 1.0, "Bakery", ("wifi",),
             "Small-group lessons and exam prep"),
    LeafSpec(("Sports", "Gym"), "morning", 1.0, 1.0, 1.0, "Spa", ("parking", "pets"),
             "Weights, classes, and early hours"),
    LeafSpec(("Travel", "Hotel"), "night", 1.0, 2.0, 1.0, "Cinema", ("parking", "pets", "wifi"),
             "Compact rooms near the transit line"),
)

_HOURS_BY_PEAK = {
    "morning": [{"weekday": w, "open": 360, "close": 840} for w in range(7)],
    "midday": [{"weekday": w, "open": 600, "close": 900} for w in range(7)],
    "afternoon": [{"weekday": w, "open": 600, "close": 1080} for w in range(7)],
    "evening": [{"weekday": w, "open": 660, "close": 1320} for w in range(7)],
    # Overnight raw form (open > close): the ingester splits it on load.
    "night": [{"weekday": w, "open": 1080, "close": 120} for w in range(7)],
}

_BASE_LAT = 39.90
_BASE_LON = 116.40
_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)
_START_DAY = date(2024, 1, 1)


def _frac(rng: SplitMix64) -> float:
    return rng.next_u64() / 2.0**64


def _leaf_of(index: int) -> LeafSpec:
    return LEAVES[index % len(LEAVES)]


def _brand_for(leaf: LeafSpec, index_in_leaf: int) -> tuple[str | None, str]:
    """(brand, tier): the first six categories carry premium/budget brand pairs."""
    leaf_no = LEAVES.index(leaf)
    if leaf_no >= 6:
        return None, "mid"
    if index_in_leaf % 3 == 0:
        return f"Golden {leaf.path[1]} Co", "premium"
    if index_in_leaf % 3 == 1:
        return f"Thrifty {leaf.path[1]} Group", "budget"
    return None, "mid"


def build_merchants(n_merchants: int, city: str, seed: int) -> list[dict]:
    rng = SplitMix64(derive_seed(seed, "demo", "merchants"))
    merchants = []
    per_leaf_count: dict[int, int] = {}
    for i in range(n_merchants):
        leaf = _leaf_of(i)
        leaf_no = i % len(LEAVES)
        index_in_leaf = per_leaf_count.get(leaf_no, 0)
        per_leaf_count[leaf_no] = index_in_leaf + 1
        brand, tier = _brand_for(leaf, index_in_leaf)
        if tier == "premium":
            price = 180 + (i * 13) % 110
        elif tier == "budget":
            price = 20 + (i * 7) % 70
        else:
            price = 90 + (i * 11) % 70
        capacity = 10 + (i * 7) % 150
        function = FUNCTIONS[i % len(FUNCTIONS)]
        attrs = [f"price: {price} yuan", f"capacity: {capacity} seats", f"function: {function}"]
        for key_no, key in enumerate(leaf.optional_attrs):
            values = _OPTIONAL_VALUES[key]
            attrs.append(f"{key}: {values[(i + key_no) % len(values)]}")
        business_district = BUSINESS_DISTRICTS[i % len(BUSINESS_DISTRICTS)]
        district = DISTRICTS[(i // 3) % len(DISTRICTS)]
        merchants.append(
            {
                "merchant_id": f"m{i:04d}",
                "name": f"{NAME_ADJECTIVES[i % 8]} {leaf.path[1]} {NAME_SUFFIXES[i % 5]} {i}",
                "introduction": f"{leaf.flavor} in {business_district}. " + "; ".join(attrs),
                "category_path": list(leaf.path),
                "brand": brand,
                "location": {
                    "latitude": round(_BASE_LAT + (_frac(rng) - 0.5) * 0.09, 6),
                    "longitude": round(_BASE_LON + (_frac(rng) - 0.5) * 0.11, 6),
                    "address": f"{business_district}, {district} District",
                },
                "operating_hours": _HOURS_BY_PEAK[leaf.peak],
                "city": city,
            }
        )
    return merchants


def build_users(n_users: int, city: str) -> list[dict]:
    users = []
    for i in range(n_users):
        leaf_no = i % len(LEAVES)
        users.append(
            {
                "user_id": f"u{i:04d}",
                "profile": {
                    "age_band": AGE_BANDS[i % len(AGE_BANDS)],
                    "group": GROUPS[leaf_no % len(GROUPS)],
                    "interest": LEAVES[leaf_no].path[1],
                },
                "city": city,
            }
        )
    return users


def build_calendar(days: int, city: str) -> list[dict]:
    rows = []
    for i in range(days):
        day = _START_DAY + timedelta(days=i)
        iso = day.isoformat()
        rows.append(
            {
                "city": city,
                "date": iso,
                "weather": WEATHER_CYCLE[i % 3],
                "is_holiday": day.weekday() >= 5,
                "season": season_for_date(iso),
            }
        )
    return rows


def _order_count(leaf: LeafSpec, weather: str, season: str) -> int:
    mult = 1.0
    if weather == "rainy":
        mult *= leaf.rainy_mult
    if season == "summer":
        mult *= leaf.summer_mult
    elif season == "winter":
        mult *= leaf.winter_mult
    return round(2 * mult)


def _peak_hour(leaf: LeafSpec, rng: SplitMix64) -> int:
    name = leaf.peak
    start, end = next((s, e) for p, s, e in PERIODS if p == name)
    if rng.randbelow(10) < 7:
        hour = start + rng.randbelow(end - start)
    else:
        hour = 8 + rng.randbelow(14)
    return hour % 24


def _interest_pools(users: list[dict]) -> dict[str, list[str]]:
    pools: dict[str, list[str]] = {}
    for user in users:
        pools.setdefault(user["profile"]["interest"], []).append(user["user_id"])
    return pools


def build_interactions(
    merchants: list[dict], users: list[dict], calendar: list[dict], seed: int
) -> list[dict]:
    rng = SplitMix64(derive_seed(seed, "demo", "orders"))
    interest_pools = _interest_pools(users)
    companion_sources: dict[str, list[str]] = {}
    for leaf in LEAVES:
        companion_sources.setdefault(leaf.companion, [])
        if leaf.path[1] in interest_pools:
            companion_sources[leaf.companion].extend(interest_pools[leaf.path[1]])
    all_user_ids = [u["user_id"] for u in users]

    rows = []
    for m_index, merchant in enumerate(merchants):
        leaf = _leaf_of(m_index)
        own_pool = interest_pools.get(leaf.path[1], all_user_ids)
        # Categories that are nobody's companion sell only to their own interest
        # group; this keeps each user's category set small and crisp.
        companion_pool = companion_sources.get(leaf.path[1]) or own_pool
        for day in calendar:
            count = _order_count(leaf, day["weather"], day["season"])
            day_offset = (date.fromisoformat(day["date"]) - _START_DAY).days
            for _ in range(count):
                # Orders come only from interest-matched users (80%) or from users
                # whose interest treats this category as its companion (20%), so
                # every user has a crisp preference profile and a non-empty set of
                # never-visited merchants.
                if rng.randbelow(10) < 8:
                    user_id = own_pool[rng.randbelow(len(own_pool))]
                else:
                    user_id = companion_pool[rng.randbelow(len(companion_pool))]
                hour = _peak_hour(leaf, rng)
                minute = rng.randbelow(60)
                timestamp = int((_EPOCH + timedelta(days=day_offset, hours=hour, minutes=minute)).timestamp())
                rows.append(
                    {
                        "user_id": user_id,
                        "merchant_id": merchant["merchant_id"],
                        "timestamp": timestamp,
                        "location": merchant["location"] | {},
                        "action": "order",
                    }
                )

    # Search episodes: a search with an ambiguous category query, then a click
    # and an order on the same merchant shortly after.
    merchants_by_leaf: dict[str, list[dict]] = {}
    for m_index, merchant in enumerate(merchants):
        merchants_by_leaf.setdefault(_leaf_of(m_index).path[1], []).append(merchant)
    n_days = len(calendar)
    for u_index, user in enumerate(users):
        interest = user["profile"]["interest"]
        pool = merchants_by_leaf.get(interest)
        if not pool:
            continue
        for episode in range(3):
            merchant = pool[(u_index + episode) % len(pool)]
            day_offset = (u_index * 7 + episode * 29) % n_days
            base = _EPOCH + timedelta(days=day_offset, hours=10, minutes=(u_index * 3) % 60)
            for offset_min, action in ((0, "search"), (10, "click"), (20, "order")):
                row = {
                    "user_id": user["user_id"],
                    "merchant_id": merchant["merchant_id"],
                    "timestamp": int((base + timedelta(minutes=offset_min)).timestamp()),
                    "location": merchant["location"] | {},
                    "action": action,
                }
                if action == "search":
                    row["query"] = interest.lower()
                rows.append(row)
    for row in rows:
        row["location"] = {"latitude": row["location"]["latitude"],
                           "longitude": row["location"]["longitude"]}
    return rows


_REVIEW_SENTENCES = (
    "The {leaf} at {name} was worth the wait.",
    "Staff at {name} remembered our usual order.",
    "Prices at {name} felt fair for the portions.",
    "We took the whole family to {name} on a Saturday.",
)


def build_reviews(merchants: list[dict], users: list[dict], seed: int) -> list[dict]:
    n_reviews = min(len(merchants) * 2, 72)
    rows = []
    for j in range(n_reviews):
        merchant = merchants[j % len(merchants)]
        author = users[(j * 5 + 1) % len(users)]
        leaf = merchant["category_path"][-1]
        text = (
            _REVIEW_SENTENCES[j % len(_REVIEW_SENTENCES)].format(leaf=leaf, name=merchant["name"])
            + f" Tip {j}: arrive before the rush."
        )
        labels = {
            "in_depth_content": str(j % 4),
            "actionable_suggestions": "yes" if j % 2 == 0 else "no",
            "natural_colloquial": "yes" if j % 3 != 0 else "no",
            "credible_engaging": "yes" if j % 5 != 0 else "no",
            "non_promotional": "yes" if j % 7 != 0 else "no",
            "non_ai_generated": "yes" if j % 11 != 0 else "no",
            "overall_usefulness": "yes" if j % 2 == 1 else "no",
        }
        annotations = []
        for dimension, label in labels.items():
            if j % 12 == 11:
                # Single annotator: fails the minimum-annotator gate.
                annotations.append({"annotator_id": "a1", "dimension": dimension, "label": label})
                continue
            second = label
            if j % 12 == 10 and dimension == "overall_usefulness":
                second = "no" if label == "yes" else "yes"  # engineered disagreement
            annotations.append({"annotator_id": "a1", "dimension": dimension, "label": label})
            annotations.append({"annotator_id": "a2", "dimension": dimension, "label": second})
        rows.append(
            {
                "review_id": f"r{j:04d}",
                "user_id": author["user_id"],
                "merchant_id": merchant["merchant_id"],
                "text": text,
                "annotations": annotations,
            }
        )
    return rows


def write_demo_data(
    out_dir: Path,
    seed: int = 7,
    city: str = "riverton",
    n_merchants: int = 36,
    n_users: int = 24,
    days: int = 150,
) -> dict[str, Path]:
    """Write all five raw store files; returns the path map for load_bundle."""
    out_dir.mkdir(parents=True, exist_ok=True)
    merchants = build_merchants(n_merchants, city, seed)
    users = build_users(n_users, city)
    calendar = build_calendar(days, city)
    interactions = build_interactions(merchants, users, calendar, seed)
    reviews = build_reviews(merchants, users, seed)
    paths = {}
    for kind, rows in (
        ("merchants", merchants),
        ("users", users),
        ("interactions", interactions),
        ("reviews", reviews),
        ("calendar", calendar),
    ):
        path = out_dir / f"{kind}.jsonl"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False))
                fh.write("\n")
        paths[kind] = path
    return paths


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Write the deterministic demo store files.")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--city", default="riverton")
    parser.add_argument("--merchants", type=int, default=36)
    parser.add_argument("--users", type=int, default=24)
    parser.add_argument("--days", type=int, default=150)
    args = parser.parse_args(argv)
    paths = write_demo_data(args.out, args.seed, args.city, args.merchants, args.users, args.days)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
