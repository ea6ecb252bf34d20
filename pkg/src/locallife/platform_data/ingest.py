"""JSONL ingestion with validation, denylist scrubbing, and canonical export.

Per-line failures never abort a file: malformed JSON and invariant violations
are skipped and reported with their line number.  A file where more than half
the lines fail is treated as structurally wrong and rejected outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import DataError
from .records import (
    ACTIONS,
    REVIEW_DIMENSIONS,
    SEASONS,
    WEATHERS,
    AnnotationRecord,
    CalendarDay,
    HoursInterval,
    InteractionRecord,
    Location,
    MerchantRecord,
    Record,
    ReviewRecord,
    Store,
    StoreBundle,
    UserRecord,
    require_integrity,
    season_for_date,
)

KINDS = ("merchants", "users", "interactions", "reviews", "calendar")

# Canonical export key order per kind; extras follow, sorted by key.
_CANONICAL_KEYS = {
    "merchants": ("merchant_id", "name", "introduction", "category_path", "brand",
                  "location", "operating_hours", "city"),
    "users": ("user_id", "profile", "city"),
    "interactions": ("user_id", "merchant_id", "timestamp", "location", "action",
                     "query", "review_id"),
    "reviews": ("review_id", "user_id", "merchant_id", "text", "annotations"),
    "calendar": ("city", "date", "weather", "is_holiday", "season"),
}


class _LineError(Exception):
    """Internal: invariant violation for one line; message cites the field."""


@dataclass
class IngestReport:
    kind: str
    path: str
    accepted: int = 0
    repaired: int = 0
    scrubbed: int = 0
    malformed: int = 0
    rejected: int = 0
    details: list[dict[str, Any]] = field(default_factory=list)

    def note(self, line_no: int, outcome: str, reason: str) -> None:
        self.details.append({"line": line_no, "outcome": outcome, "reason": reason})

    @property
    def total_lines(self) -> int:
        return self.accepted + self.scrubbed + self.malformed + self.rejected

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "path": self.path,
            "accepted": self.accepted,
            "repaired": self.repaired,
            "scrubbed": self.scrubbed,
            "malformed": self.malformed,
            "rejected": self.rejected,
            "details": self.details,
        }


def load_denylist(path: Path | None) -> list[str]:
    """One term per line, UTF-8; blank lines and leading/trailing space ignored."""
    if path is None:
        return []
    terms = []
    for line in path.read_text(encoding="utf-8").splitlines():
        term = line.strip()
        if term:
            terms.append(term)
    return terms


def _denylist_hit(texts: list[str], denylist: list[str]) -> str | None:
    for text in texts:
        lowered = text.lower()
        for term in denylist:
            if term.lower() in lowered:
                return term
    return None


def ingest(kind: str, path: Path, denylist: list[str] | None = None) -> tuple[Store, IngestReport]:
    """Parse one JSONL file into a Store of validated records.

    Order-preserving and idempotent: re-ingesting the same bytes yields the
    same store.  Raises DataError if the file is unreadable or if more than
    half of its lines fail to parse or validate.
    """
    if kind not in KINDS:
        raise DataError(f"unknown store kind {kind!r}; expected one of {KINDS}")
    denylist = denylist or []
    report = IngestReport(kind=kind, path=str(path))
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    records: list[Record] = []
    seen_keys: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            report.malformed += 1
            report.note(line_no, "malformed", f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(raw, dict):
            report.malformed += 1
            report.note(line_no, "malformed", "line is not a JSON object")
            continue
        try:
            record, repaired = _parse_record(kind, raw, seen_keys)
        except _LineError as exc:
            report.rejected += 1
            report.note(line_no, "rejected", str(exc))
            continue
        term = _denylist_hit(record.text_fields(), denylist)
        if term is not None:
            report.scrubbed += 1
            report.note(line_no, "scrubbed", f"contains denylisted term {term!r}")
            continue
        if repaired:
            report.repaired += 1
            report.note(line_no, "repaired", repaired)
        records.append(record)
        report.accepted += 1

    if report.total_lines == 0:
        raise DataError(f"{path} contains no records")
    # Scrubbed lines parsed fine; only schema-level failures suggest the wrong file.
    failed = report.malformed + report.rejected
    if failed * 2 > report.total_lines:
        raise DataError(
            f"{path}: {failed} of {report.total_lines} lines rejected; "
            f"this does not look like a {kind} file"
        )
    return Store(kind, records), report


def _require(raw: dict, key: str, types: type | tuple) -> Any:
    if key not in raw:
        raise _LineError(f"missing field {key!r}")
    value = raw[key]
    if not isinstance(value, types):
        raise _LineError(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _nonempty_str(raw: dict, key: str) -> str:
    value = _require(raw, key, str)
    if not value.strip():
        raise _LineError(f"field {key!r} is empty")
    return value


def _extras(raw: dict, kind: str) -> dict[str, Any]:
    return {k: v for k, v in raw.items() if k not in _CANONICAL_KEYS[kind]}


def _parse_location(raw: Any, require_address: bool) -> Location:
    if not isinstance(raw, dict):
        raise _LineError("field 'location' is not an object")
    try:
        lat = float(raw["latitude"])
        lon = float(raw["longitude"])
    except (KeyError, TypeError, ValueError) as exc:
        raise _LineError(f"location missing numeric latitude/longitude ({exc})") from exc
    if not -90.0 <= lat <= 90.0:
        raise _LineError(f"field 'latitude' out of range: {lat}")
    if not -180.0 <= lon <= 180.0:
        raise _LineError(f"field 'longitude' out of range: {lon}")
    address = raw.get("address", "")
    if require_address and not isinstance(address, str):
        raise _LineError("field 'address' has wrong type")
    return Location(lat, lon, address if isinstance(address, str) else "")


def _parse_hours(raw: Any) -> tuple[list[HoursInterval], bool]:
    if not isinstance(raw, list):
        raise _LineError("field 'operating_hours' is not a list")
    intervals: list[HoursInterval] = []
    repaired = False
    for entry in raw:
        if not isinstance(entry, dict):
            raise _LineError("operating_hours entry is not an object")
        try:
            weekday = int(entry["weekday"])
            open_m = int(entry["open"])
            close_m = int(entry["close"])
        except (KeyError, TypeError, ValueError) as exc:
            raise _LineError(f"operating_hours entry malformed ({exc})") from exc
        if not 0 <= weekday <= 6:
            raise _LineError(f"operating_hours weekday out of range: {weekday}")
        if not (0 <= open_m <= 1440 and 0 <= close_m <= 1440):
            raise _LineError("operating_hours minutes out of range")
        if close_m == 0:
            close_m = 1440
        if open_m == close_m:
            raise _LineError("operating_hours interval is empty")
        if open_m > close_m:
            # Overnight interval: split into two same-day pieces.
            intervals.append(HoursInterval(weekday, open_m, 1440))
            intervals.append(HoursInterval(weekday, 0, close_m))
            repaired = True
        else:
            intervals.append(HoursInterval(weekday, open_m, close_m))
    return intervals, repaired


def _parse_record(kind: str, raw: dict, seen_keys: set[str]) -> tuple[Record, str]:
    if kind == "merchants":
        merchant_id = _nonempty_str(raw, "merchant_id")
        if merchant_id in seen_keys:
            raise _LineError(f"duplicate merchant_id {merchant_id!r}")
        category_path = _require(raw, "category_path", list)
        if not category_path or not all(isinstance(c, str) and c for c in category_path):
            raise _LineError("field 'category_path' must be a non-empty list of names")
        hours, repaired = _parse_hours(raw.get("operating_hours", []))
        record = MerchantRecord(
            merchant_id=merchant_id,
            name=_nonempty_str(raw, "name"),
            introduction=_require(raw, "introduction", str),
            category_path=tuple(category_path),
            brand=raw.get("brand") or None,
            location=_parse_location(_require(raw, "location", dict), require_address=True),
            operating_hours=tuple(hours),
            city=_nonempty_str(raw, "city"),
            extra=_extras(raw, kind),
        )
        seen_keys.add(merchant_id)
        return record, "overnight operating hours split" if repaired else ""

    if kind == "users":
        user_id = _nonempty_str(raw, "user_id")
        if user_id in seen_keys:
            raise _LineError(f"duplicate user_id {user_id!r}")
        profile = _require(raw, "profile", dict)
        clean_profile: dict[str, str] = {}
        for key, value in profile.items():
            if not isinstance(key, str) or not key.strip():
                raise _LineError("profile keys must be non-empty strings")
            clean_profile[key] = str(value)
        record = UserRecord(
            user_id=user_id,
            profile=clean_profile,
            city=_nonempty_str(raw, "city"),
            extra=_extras(raw, kind),
        )
        seen_keys.add(user_id)
        return record, ""

    if kind == "interactions":
        action = _nonempty_str(raw, "action")
        if action not in ACTIONS:
            raise _LineError(f"field 'action' has unknown value {action!r}")
        query = raw.get("query")
        if action == "search" and not (isinstance(query, str) and query.strip()):
            raise _LineError("search actions must carry a query")
        record = InteractionRecord(
            user_id=_nonempty_str(raw, "user_id"),
            merchant_id=_nonempty_str(raw, "merchant_id"),
            timestamp=int(_require(raw, "timestamp", (int, float))),
            location=_parse_location(_require(raw, "location", dict), require_address=False),
            action=action,
            query=query if isinstance(query, str) and query.strip() else None,
            review_id=raw.get("review_id") or None,
            extra=_extras(raw, kind),
        )
        return record, ""

    if kind == "reviews":
        review_id = _nonempty_str(raw, "review_id")
        if review_id in seen_keys:
            raise _LineError(f"duplicate review_id {review_id!r}")
        annotations = []
        seen_pairs: set[tuple[str, str]] = set()
        for entry in raw.get("annotations", []):
            if not isinstance(entry, dict):
                raise _LineError("annotation entry is not an object")
            dimension = entry.get("dimension")
            if dimension not in REVIEW_DIMENSIONS:
                raise _LineError(f"annotation dimension {dimension!r} not recognized")
            annotator = entry.get("annotator_id")
            if not isinstance(annotator, str) or not annotator:
                raise _LineError("annotation missing annotator_id")
            if (annotator, dimension) in seen_pairs:
                raise _LineError(f"duplicate annotation by {annotator!r} on {dimension!r}")
            seen_pairs.add((annotator, dimension))
            annotations.append(AnnotationRecord(annotator, dimension, str(entry.get("label", ""))))
        record = ReviewRecord(
            review_id=review_id,
            user_id=_nonempty_str(raw, "user_id"),
            merchant_id=_nonempty_str(raw, "merchant_id"),
            text=_nonempty_str(raw, "text"),
            annotations=tuple(annotations),
            extra=_extras(raw, kind),
        )
        seen_keys.add(review_id)
        return record, ""

    # calendar
    city = _nonempty_str(raw, "city")
    date = _nonempty_str(raw, "date")
    if len(date) != 10 or date[4] != "-" or date[7] != "-":
        raise _LineError(f"field 'date' is not ISO formatted: {date!r}")
    key = f"{city}:{date}"
    if key in seen_keys:
        raise _LineError(f"duplicate calendar date {date!r} for city {city!r}")
    weather = _nonempty_str(raw, "weather")
    if weather not in WEATHERS:
        raise _LineError(f"field 'weather' has unknown value {weather!r}")
    season = _nonempty_str(raw, "season")
    if season not in SEASONS:
        raise _LineError(f"field 'season' has unknown value {season!r}")
    if season != season_for_date(date):
        raise _LineError(f"season {season!r} inconsistent with date {date!r}")
    record = CalendarDay(
        city=city,
        date=date,
        weather=weather,
        is_holiday=bool(_require(raw, "is_holiday", bool)),
        season=season,
        extra=_extras(raw, kind),
    )
    seen_keys.add(key)
    return record, ""


def export_record(kind: str, record: Record) -> dict[str, Any]:
    """Canonical JSON form: fixed key order, extras appended sorted."""
    if kind == "merchants":
        body: dict[str, Any] = {
            "merchant_id": record.merchant_id,
            "name": record.name,
            "introduction": record.introduction,
            "category_path": list(record.category_path),
            "brand": record.brand,
            "location": record.location.as_dict(),
            "operating_hours": [h.as_dict() for h in record.operating_hours],
            "city": record.city,
        }
    elif kind == "users":
        body = {"user_id": record.user_id, "profile": dict(record.profile), "city": record.city}
    elif kind == "interactions":
        body = {
            "user_id": record.user_id,
            "merchant_id": record.merchant_id,
            "timestamp": record.timestamp,
            "location": {"latitude": record.location.latitude, "longitude": record.location.longitude},
            "action": record.action,
            "query": record.query,
            "review_id": record.review_id,
        }
    elif kind == "reviews":
        body = {
            "review_id": record.review_id,
            "user_id": record.user_id,
            "merchant_id": record.merchant_id,
            "text": record.text,
            "annotations": [
                {"annotator_id": a.annotator_id, "dimension": a.dimension, "label": a.label}
                for a in record.annotations
            ],
        }
    else:
        body = {
            "city": record.city,
            "date": record.date,
            "weather": record.weather,
            "is_holiday": record.is_holiday,
            "season": record.season,
        }
    for key in sorted(record.extra):
        body[key] = record.extra[key]
    return body


def export_store(store: Store, path: Path) -> int:
    """Write the canonical JSONL form; ingest(export(store)) == store."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in store:
            fh.write(json.dumps(export_record(store.kind, record), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def load_bundle(
    paths: dict[str, Path],
    denylist: list[str] | None = None,
    city: str | None = None,
) -> tuple[StoreBundle, dict[str, IngestReport]]:
    """Ingest all five stores and assemble an integrity-checked bundle."""
    stores: dict[str, Store] = {}
    reports: dict[str, IngestReport] = {}
    for kind in KINDS:
        if kind not in paths:
            raise DataError(f"no path configured for store kind {kind!r}")
        stores[kind], reports[kind] = ingest(kind, paths[kind], denylist)
    manifest = {
        "paths": {kind: str(paths[kind]) for kind in KINDS},
        "counts": {kind: len(stores[kind]) for kind in KINDS},
    }
    bundle = StoreBundle(
        merchants=stores["merchants"],
        users=stores["users"],
        interactions=stores["interactions"],
        reviews=stores["reviews"],
        calendar=stores["calendar"],
        manifest=manifest,
    )
    require_integrity(bundle)
    if city is not None:
        bundle = bundle.filtered_to_city(city)
    return bundle, reports
