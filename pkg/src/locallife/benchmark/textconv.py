"""Documented text conventions for ground data.

Merchant introductions may embed attribute pairs as ``key: value`` segments
separated by semicolons (e.g. ``price: 58 yuan; capacity: 40 seats``), and
addresses follow ``<business district>, <name> District``.  The extraction
rules here are the builder's side of that contract; records that do not
follow it are simply skipped by the tasks that need it.
"""

from __future__ import annotations

import re

ATTRIBUTE_RE = re.compile(r"(?:^|[;.]\s*)([a-z_][a-z0-9_ ]{0,30}?):\s*([^;.]+)")
_LEADING_INT_RE = re.compile(r"(\d+)")


def parse_attributes(text: str) -> dict[str, str]:
    """First-win key -> value map of the attribute pairs embedded in a description."""
    attrs: dict[str, str] = {}
    for match in ATTRIBUTE_RE.finditer(text):
        key = match.group(1).strip()
        value = match.group(2).strip()
        if key and value and key not in attrs:
            attrs[key] = value
    return attrs


def parse_address(address: str) -> tuple[str | None, str | None]:
    """(business district, administrative district) per the address convention."""
    parts = [p.strip() for p in address.split(",")]
    business = parts[0] if parts and parts[0] else None
    district = None
    for part in parts[1:]:
        if part.endswith(" District"):
            district = part[: -len(" District")]
            break
    return business, district


def leading_int(value: str) -> int | None:
    match = _LEADING_INT_RE.search(value)
    return int(match.group(1)) if match else None


def normalize_value(value: str) -> str:
    """Case/whitespace/punctuation-insensitive canonical form of an attribute value."""
    return re.sub(r"\s+", " ", value.casefold().strip(" .,!?"))


def value_tokens(value: str) -> frozenset[str]:
    return frozenset(normalize_value(value).split())
