"""Canonical platform entities and their validation rules.

Each record type mirrors one JSONL schema (documented in the README).  Extra
JSONL keys are preserved opaquely in ``extra`` and re-emitted on export, but
nothing in this package ever interprets them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import DataError

ACTIONS = ("browse", "click", "order", "search")
WEATHERS = ("sunny", "rainy", "other")
SEASONS = ("spring", "summer", "autumn", "winter")

REVIEW_DIMENSIONS = (
    "in_depth_content",
    "actionable_suggestions",
    "natural_colloquial",
    "credible_engaging",
    "non_promotional",
    "non_ai_generated",
    "overall_usefulness",
)

# Month -> season mapping used to validate calendars; the hemisphere rule is
# configurable at the library level and defaults to northern.
_SEASON_BY_MONTH = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "autumn", 10: "autumn", 11: "autumn",
}
_OPPOSITE_SEASON = {"winter": "summer", "summer": "winter", "spring": "autumn", "autumn": "spring"}


@dataclass(frozen=True)
class HoursInterval:
    weekday: int          # 0 = Monday .. 6 = Sunday
    open_minute: int      # minute of day, inclusive
    close_minute: int     # minute of day, exclusive; open < close always holds

    def as_dict(self) -> dict[str, int]:
        return {"weekday": self.weekday, "open": self.open_minute, "close": self.close_minute}


@dataclass(frozen=True)
class Location:
    latitude: float
    longitude: float
    address: str = ""

    def as_dict(self) -> dict[str, Any]:
        return {"latitude": self.latitude, "longitude": self.longitude, "address": self.address}


@dataclass(frozen=True)
class MerchantRecord:
    merchant_id: str
    name: str
    introduction: str
    category_path: tuple[str, ...]
    location: Location
    operating_hours: tuple[HoursInterval, ...]
    city: str
    brand: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def text_fields(self) -> list[str]:
        parts = [self.name, self.introduction, self.location.address, *self.category_path]
        if self.brand:
            parts.append(self.brand)
        return parts

    def leaf_category(self) -> str:
        return self.category_path[-1]


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    profile: dict[str, str]
    city: str
    extra: dict[str, Any] = field(default_factory=dict)

    def text_fields(self) -> list[str]:
        return [v for v in self.profile.values()]


@dataclass(frozen=True)
class InteractionRecord:
    user_id: str
    merchant_id: str
    timestamp: int
    location: Location
    action: str
    query: str | None = None
    review_id: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def text_fields(self) -> list[str]:
        return [self.query] if self.query else []


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    dimension: str
    label: str


@dataclass(frozen=True)
class ReviewRecord:
    review_id: str
    user_id: str
    merchant_id: str
    text: str
    annotations: tuple[AnnotationRecord, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    def text_fields(self) -> list[str]:
        return [self.text]


@dataclass(frozen=True)
class CalendarDay:
    city: str
    date: str             # ISO YYYY-MM-DD
    weather: str
    is_holiday: bool
    season: str
    extra: dict[str, Any] = field(default_factory=dict)

    def text_fields(self) -> list[str]:
        return []


Record = MerchantRecord | UserRecord | InteractionRecord | ReviewRecord | CalendarDay


class Store:
    """Immutable, order-preserving collection of one record kind."""

    def __init__(self, kind: str, records: list[Record]):
        self.kind = kind
        self._records = tuple(records)
        self._by_id = {record_id(kind, r, i): r for i, r in enumerate(self._records)}

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def records(self) -> tuple[Record, ...]:
        return self._records

    def get(self, key: str) -> Record | None:
        return self._by_id.get(key)

    def ids(self) -> list[str]:
        return [record_id(self.kind, r, i) for i, r in enumerate(self._records)]


def record_id(kind: str, record: Record, index: int) -> str:
    if kind == "merchants":
        return record.merchant_id
    if kind == "users":
        return record.user_id
    if kind == "reviews":
        return record.review_id
    if kind == "calendar":
        return f"{record.city}:{record.date}"
    return f"interaction:{index}"


@dataclass(frozen=True)
class StoreBundle:
    """All five stores plus the manifest describing where they came from."""

    merchants: Store
    users: Store
    interactions: Store
    reviews: Store
    calendar: Store
    manifest: dict[str, Any]

    def merchant(self, merchant_id: str) -> MerchantRecord | None:
        return self.merchants.get(merchant_id)

    def user(self, user_id: str) -> UserRecord | None:
        return self.users.get(user_id)

    def review(self, review_id: str) -> ReviewRecord | None:
        return self.reviews.get(review_id)

    def calendar_days(self, city: str) -> list[CalendarDay]:
        return [d for d in self.calendar if d.city == city]

    def filtered_to_city(self, city: str) -> "StoreBundle":
        merchants = Store("merchants", [m for m in self.merchants if m.city == city])
        users = Store("users", [u for u in self.users if u.city == city])
        merchant_ids = set(merchants.ids())
        user_ids = set(users.ids())
        interactions = Store(
            "interactions",
            [i for i in self.interactions if i.merchant_id in merchant_ids and i.user_id in user_ids],
        )
        review_ids = {i.review_id for i in interactions if i.review_id}
        reviews = Store(
            "reviews",
            [r for r in self.reviews if r.merchant_id in merchant_ids or r.review_id in review_ids],
        )
        calendar = Store("calendar", [d for d in self.calendar if d.city == city])
        manifest = dict(self.manifest)
        manifest["city_filter"] = city
        return StoreBundle(merchants, users, interactions, reviews, calendar, manifest)


def check_referential_integrity(bundle: StoreBundle) -> list[str]:
    """Return human-readable violations; empty list means the bundle is sound."""
    problems: list[str] = []
    merchant_ids = set(bundle.merchants.ids())
    user_ids = set(bundle.users.ids())
    review_ids = set(bundle.reviews.ids())
    for i, rec in enumerate(bundle.interactions):
        if rec.merchant_id not in merchant_ids:
            problems.append(f"interaction {i}: unknown merchant {rec.merchant_id!r}")
        if rec.user_id not in user_ids:
            problems.append(f"interaction {i}: unknown user {rec.user_id!r}")
        if rec.review_id and rec.review_id not in review_ids:
            problems.append(f"interaction {i}: unknown review {rec.review_id!r}")
    for rec in bundle.reviews:
        if rec.merchant_id not in merchant_ids:
            problems.append(f"review {rec.review_id}: unknown merchant {rec.merchant_id!r}")
        if rec.user_id not in user_ids:
            problems.append(f"review {rec.review_id}: unknown user {rec.user_id!r}")
    return problems


def require_integrity(bundle: StoreBundle) -> StoreBundle:
    problems = check_referential_integrity(bundle)
    if problems:
        preview = "; ".join(problems[:5])
        raise DataError(f"store bundle has {len(problems)} integrity violation(s): {preview}")
    return bundle


def season_for_date(date: str, hemisphere: str = "north") -> str:
    month = int(date[5:7])
    season = _SEASON_BY_MONTH[month]
    if hemisphere == "south":
        return _OPPOSITE_SEASON[season]
    if hemisphere != "north":
        raise DataError(f"unknown hemisphere {hemisphere!r}; expected north or south")
    return season
