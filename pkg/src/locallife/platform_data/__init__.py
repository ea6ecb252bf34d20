"""Ingestion, validation, and deterministic sampling of raw platform entities."""

from .ingest import (
    KINDS,
    IngestReport,
    export_record,
    export_store,
    ingest,
    load_bundle,
    load_denylist,
)
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
    ReviewRecord,
    Store,
    StoreBundle,
    UserRecord,
    check_referential_integrity,
    require_integrity,
    season_for_date,
)
from .sampling import sample_entities

__all__ = [
    "ACTIONS",
    "KINDS",
    "REVIEW_DIMENSIONS",
    "SEASONS",
    "WEATHERS",
    "AnnotationRecord",
    "CalendarDay",
    "HoursInterval",
    "IngestReport",
    "InteractionRecord",
    "Location",
    "MerchantRecord",
    "ReviewRecord",
    "Store",
    "StoreBundle",
    "UserRecord",
    "check_referential_integrity",
    "export_record",
    "export_store",
    "ingest",
    "load_bundle",
    "load_denylist",
    "require_integrity",
    "sample_entities",
    "season_for_date",
]
