"""Canonical text rendering of record fields used in templates and prompts."""

from __future__ import annotations

from datetime import datetime, timezone

from ..errors import DataError
from ..platform_data import InteractionRecord, MerchantRecord, UserRecord

_DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

MERCHANT_FIELDS = ("merchant_id", "name", "introduction", "category_path", "brand",
                   "address", "operating_hours", "city")
USER_FIELDS = ("user_id", "profile", "city")
INTERACTION_FIELDS = ("action", "time", "query")

FIELDS_BY_KIND = {
    "merchant": MERCHANT_FIELDS,
    "user": USER_FIELDS,
    "interaction": INTERACTION_FIELDS,
}


def minute_text(minute: int) -> str:
    return f"{minute // 60:02d}:{minute % 60:02d}"


def hours_text(merchant: MerchantRecord) -> str:
    parts = [
        f"{_DAY_NAMES[h.weekday]} {minute_text(h.open_minute)}-{minute_text(h.close_minute)}"
        for h in merchant.operating_hours
    ]
    return "; ".join(parts)


def profile_text(user: UserRecord) -> str:
    return "; ".join(f"{key}: {user.profile[key]}" for key in sorted(user.profile))


def timestamp_text(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m-%d %H:%M")


def field_text(kind: str, record: object, field: str) -> str:
    """Rendered value for one template field; empty string when absent."""
    if kind == "merchant":
        merchant: MerchantRecord = record  # type: ignore[assignment]
        if field == "merchant_id":
            return merchant.merchant_id
        if field == "name":
            return merchant.name
        if field == "introduction":
            return merchant.introduction
        if field == "category_path":
            return " > ".join(merchant.category_path)
        if field == "brand":
            return merchant.brand or ""
        if field == "address":
            return merchant.location.address
        if field == "operating_hours":
            return hours_text(merchant)
        if field == "city":
            return merchant.city
    elif kind == "user":
        user: UserRecord = record  # type: ignore[assignment]
        if field == "user_id":
            return user.user_id
        if field == "profile":
            return profile_text(user)
        if field == "city":
            return user.city
    elif kind == "interaction":
        interaction: InteractionRecord = record  # type: ignore[assignment]
        if field == "action":
            return interaction.action
        if field == "time":
            return timestamp_text(interaction.timestamp)
        if field == "query":
            return interaction.query or ""
    raise DataError(f"field {field!r} is not valid for entity kind {kind!r}")
