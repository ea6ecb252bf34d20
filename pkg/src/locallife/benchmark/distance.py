"""Great-circle distance and the ordinal distance buckets used by questions."""

from __future__ import annotations

import math

from ..errors import DataError

EARTH_RADIUS_M = 6_371_000.0

DEFAULT_DISTANCE_EDGES_M = (500.0, 1000.0, 3000.0)
DISTANCE_BUCKET_LABELS = (
    "Less than 500 m",
    "Between 500 m and 1 km",
    "Between 1 km and 3 km",
    "More than 3 km",
)


def compute_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Haversine distance in meters between (lat, lon) pairs, Earth radius 6371 km."""
    for point in (a, b):
        lat, lon = point
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise DataError(f"invalid coordinates: {point}")
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def distance_bucket(meters: float, edges: tuple[float, ...] = DEFAULT_DISTANCE_EDGES_M) -> int:
    index = 0
    for edge in edges:
        if meters >= edge:
            index += 1
    return index
