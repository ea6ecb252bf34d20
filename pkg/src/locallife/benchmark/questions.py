"""Question data model and the precomputed joins shared by task generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from ..platform_data import InteractionRecord, MerchantRecord, StoreBundle
from ..synthesis.fields import minute_text
from .registry import MAX_OPTIONS, MIN_OPTIONS, TASKS_BY_ID
from .textconv import parse_attributes

YES = "Yes"
NO = "No"

PERIODS = (
    ("morning", 6, 11),
    ("midday", 11, 14),
    ("afternoon", 14, 17),
    ("evening", 17, 22),
    ("night", 22, 30),
)
PERIOD_LABELS = tuple(
    f"{name} ({start % 24:02d}:00-{end % 24:02d}:00)" for name, start, end in PERIODS
)


@dataclass(frozen=True)
class BenchmarkQuestion:
    question_id: str
    task_id: str
    stem: str
    options: tuple[str, ...]
    correct_index: int
    construction: dict[str, Any] = field(default_factory=dict)

    @property
    def category(self) -> str:
        return TASKS_BY_ID[self.task_id].category

    def validate(self) -> list[str]:
        problems = []
        task = TASKS_BY_ID.get(self.task_id)
        if task is None:
            problems.append(f"{self.question_id}: unknown task {self.task_id!r}")
            return problems
        n = len(self.options)
        if n != len(set(self.options)):
            problems.append(f"{self.question_id}: duplicate options")
        if not MIN_OPTIONS <= n <= MAX_OPTIONS:
            problems.append(f"{self.question_id}: {n} options outside [2, 20]")
        if task.is_binary and n != 2:
            problems.append(f"{self.question_id}: binary task with {n} options")
        if not task.is_binary and n != task.option_count:
            problems.append(f"{self.question_id}: expected {task.option_count} options, got {n}")
        if not 0 <= self.correct_index < n:
            problems.append(f"{self.question_id}: correct_index {self.correct_index} out of range")
        if not self.stem.strip():
            problems.append(f"{self.question_id}: empty stem")
        return problems

    def as_dict(self) -> dict[str, Any]:
        return {
            "question_id": self.question_id,
            "task_id": self.task_id,
            "category": self.category,
            "stem": self.stem,
            "options": list(self.options),
            "correct_index": self.correct_index,
            "construction": self.construction,
        }


def question_from_dict(raw: dict[str, Any]) -> BenchmarkQuestion:
    return BenchmarkQuestion(
        question_id=raw["question_id"],
        task_id=raw["task_id"],
        stem=raw["stem"],
        options=tuple(raw["options"]),
        correct_index=int(raw["correct_index"]),
        construction=dict(raw.get("construction", {})),
    )


def order_date(interaction: InteractionRecord) -> str:
    return datetime.fromtimestamp(interaction.timestamp, tz=timezone.utc).date().isoformat()


def order_hour(interaction: InteractionRecord) -> int:
    return datetime.fromtimestamp(interaction.timestamp, tz=timezone.utc).hour


def period_index(hour: int) -> int:
    for i, (_, start, end) in enumerate(PERIODS):
        if end <= 24:
            if start <= hour < end:
                return i
        elif hour >= start or hour < end % 24:
            return i
    return 0


def daily_pattern(merchant: MerchantRecord) -> str:
    """Weekday-0 operating hours as 'HH:MM-HH:MM', multiple intervals joined by ' & '."""
    intervals = [h for h in merchant.operating_hours if h.weekday == 0]
    parts = [f"{minute_text(h.open_minute)}-{minute_text(h.close_minute)}" for h in intervals]
    return " & ".join(parts)


class GenContext:
    """Joins over the bundle computed once and shared by all generators."""

    def __init__(self, bundle: StoreBundle):
        self.bundle = bundle
        self.merchants: list[MerchantRecord] = list(bundle.merchants)
        self.attrs: dict[str, dict[str, str]] = {
            m.merchant_id: parse_attributes(m.introduction) for m in self.merchants
        }
        self.all_attr_keys: list[str] = sorted(
            {key for attrs in self.attrs.values() for key in attrs}
        )
        self.leaves: list[str] = sorted({m.leaf_category() for m in self.merchants})
        self.merchants_by_leaf: dict[str, list[MerchantRecord]] = {}
        for merchant in self.merchants:
            self.merchants_by_leaf.setdefault(merchant.leaf_category(), []).append(merchant)

        self.orders_by_merchant_day: dict[str, dict[str, int]] = {}
        self.user_interactions: dict[str, list[InteractionRecord]] = {}
        self.user_orders: dict[str, list[InteractionRecord]] = {}
        for interaction in bundle.interactions:
            self.user_interactions.setdefault(interaction.user_id, []).append(interaction)
            if interaction.action == "order":
                per_day = self.orders_by_merchant_day.setdefault(interaction.merchant_id, {})
                day = order_date(interaction)
                per_day[day] = per_day.get(day, 0) + 1
                self.user_orders.setdefault(interaction.user_id, []).append(interaction)
        for records in self.user_interactions.values():
            records.sort(key=lambda r: (r.timestamp, r.merchant_id, r.action))
        for records in self.user_orders.values():
            records.sort(key=lambda r: (r.timestamp, r.merchant_id))

        self.calendar_by_city: dict[str, list] = {}
        for day in bundle.calendar:
            self.calendar_by_city.setdefault(day.city, []).append(day)
        self.calendar_index: dict[tuple[str, str], Any] = {
            (day.city, day.date): day for day in bundle.calendar
        }

        self.user_leaf_counts: dict[str, dict[str, int]] = {}
        for user_id, orders in self.user_orders.items():
            counts: dict[str, int] = {}
            for interaction in orders:
                merchant = bundle.merchant(interaction.merchant_id)
                if merchant is not None:
                    leaf = merchant.leaf_category()
                    counts[leaf] = counts.get(leaf, 0) + 1
            self.user_leaf_counts[user_id] = counts

        self.brand_merchants: dict[str, list[MerchantRecord]] = {}
        for merchant in self.merchants:
            if merchant.brand:
                self.brand_merchants.setdefault(merchant.brand, []).append(merchant)

    def day_values(self, merchant_id: str, city: str) -> list[tuple[Any, int]]:
        """(calendar day, order count) for every calendar day of the city."""
        per_day = self.orders_by_merchant_day.get(merchant_id, {})
        return [(day, per_day.get(day.date, 0)) for day in self.calendar_by_city.get(city, [])]
