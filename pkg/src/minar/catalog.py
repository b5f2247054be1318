"""
Earthquake catalog ingestion.

Parses delimited event files, assigns events to plate polygons, splits
magnitude bands and bins events into fixed-width UTC windows. Conventions:

* a window is ``[start + k*w, start + (k+1)*w)``, so an event exactly on a
  boundary belongs to the later window;
* a point lying in several plate polygons goes to the first plate in file
  order;
* polygon edges crossing the antimeridian are unwrapped before the
  ray-casting test.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

from minar.errors import DomainError
from minar.process import CountSeries, _parse_utc

__all__ = [
    "EventRecord",
    "PlateRegion",
    "BinningSpec",
    "CatalogParseResult",
    "DEFAULT_COLUMNS",
    "parse_catalog",
    "load_regions",
    "point_in_ring",
    "assign_plate",
    "assign_plates",
    "bin_counts",
    "bin_magnitude_bands",
    "magnitude_split",
]

DEFAULT_COLUMNS = {
    "time": "time",
    "longitude": "longitude",
    "latitude": "latitude",
    "depth": "depth",
    "magnitude": "magnitude",
}


@dataclass(frozen=True)
class EventRecord:
    time: datetime
    longitude: float
    latitude: float
    depth: float
    magnitude: float


@dataclass
class CatalogParseResult:
    events: list
    rejects: list = field(default_factory=list)  # (line number, raw row, reason)

    def rejects_report(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["line", "reason", "row"])
        for line, raw, reason in self.rejects:
            w.writerow([line, reason, raw])
        return buf.getvalue()


def _validate(rec: dict) -> EventRecord:
    try:
        t = _parse_utc(rec["time"])
    except (ValueError, TypeError):
        raise ValueError("unparseable time") from None
    vals = {}
    for key in ("longitude", "latitude", "depth", "magnitude"):
        try:
            vals[key] = float(rec[key])
        except (ValueError, TypeError):
            raise ValueError(f"unparseable {key}") from None
        if not math.isfinite(vals[key]):
            raise ValueError(f"non-finite {key}")
    lon, lat = vals["longitude"], vals["latitude"]
    if not -90.0 <= lat <= 90.0:
        raise ValueError("latitude out of range")
    if not -180.0 <= lon <= 180.0:
        raise ValueError("longitude out of range")
    if lon == 180.0:
        lon = -180.0
    return EventRecord(t, lon, lat, vals["depth"], vals["magnitude"])


def parse_catalog(stream, columns: Optional[dict] = None, delimiter: str = ",") -> CatalogParseResult:
    """Parse a delimited event file with a header row.

    ``columns`` maps the fields of :class:`EventRecord` to header names.
    Rows failing validation are collected in ``rejects`` with a reason.
    """
    colmap = dict(DEFAULT_COLUMNS)
    if columns:
        colmap.update(columns)
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        with open(stream, newline="") as fh:
            text = fh.read()
    else:
        text = stream.read()
    if not text.strip():
        return CatalogParseResult([])
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    missing = [f for f, h in colmap.items() if h not in header]
    if missing:
        raise DomainError(f"catalog is missing mandatory columns: {', '.join(missing)}")
    index = {f: header.index(h) for f, h in colmap.items()}
    out = CatalogParseResult([])
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        raw = delimiter.join(row)
        if len(row) < len(header):
            out.rejects.append((line, raw, "too few fields"))
            continue
        try:
            out.events.append(_validate({f: row[i].strip() for f, i in index.items()}))
        except ValueError as exc:
            out.rejects.append((line, raw, str(exc)))
    return out


@dataclass
class PlateRegion:
    """Named region made of closed (lon, lat) rings."""

    name: str
    polygons: list

    def __post_init__(self):
        rings = []
        for ring in self.polygons:
            r = np.asarray(ring, dtype=float)
            if r.ndim != 2 or r.shape[1] != 2 or r.shape[0] < 4:
                raise DomainError(f"ring of {self.name!r} needs at least 3 distinct vertices, closed")
            if not np.array_equal(r[0], r[-1]):
                raise DomainError(f"ring of {self.name!r} is not closed (first vertex != last)")
            rings.append(_unwrap_ring(r))
        self.polygons = rings

    def contains(self, lon: float, lat: float) -> bool:
        # an odd number of rings containing the point means inside (holes supported)
        inside = False
        for ring in self.polygons:
            if point_in_ring(lon, lat, ring):
                inside = not inside
        return inside


def _unwrap_ring(r: np.ndarray) -> np.ndarray:
    """Make consecutive longitudes differ by at most 180 degrees."""
    out = r.copy()
    for k in range(1, len(out)):
        step = (r[k, 0] - r[k - 1, 0] + 180.0) % 360.0 - 180.0
        out[k, 0] = out[k - 1, 0] + step
    return out


def point_in_ring(lon: float, lat: float, ring) -> bool:
    """Ray casting against one closed ring of unwrapped longitudes.

    The point is tried at ``lon`` and its 360-degree shifts so rings that
    were unwrapped past +/-180 still match.
    """
    ring = np.asarray(ring, dtype=float)
    lo, hi = ring[:, 0].min(), ring[:, 0].max()
    for shift in (0.0, 360.0, -360.0):
        x = lon + shift
        if lo <= x <= hi and _ray_cast(x, lat, ring):
            return True
    return False


def _ray_cast(x: float, y: float, ring: np.ndarray) -> bool:
    inside = False
    xs, ys = ring[:, 0], ring[:, 1]
    for k in range(len(ring) - 1):
        x1, y1, x2, y2 = xs[k], ys[k], xs[k + 1], ys[k + 1]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return inside


def load_regions(source) -> list:
    """Read plate polygons from JSON.

    Accepts ``{"regions": [{"name": ..., "polygons": [ring, ...]}]}`` or a
    GeoJSON FeatureCollection of Polygon / MultiPolygon features whose
    ``properties.name`` names the plate.
    """
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    if doc.get("type") == "FeatureCollection":
        regions = []
        for feat in doc["features"]:
            geom = feat["geometry"]
            if geom["type"] == "Polygon":
                rings = geom["coordinates"]
            elif geom["type"] == "MultiPolygon":
                rings = [r for poly in geom["coordinates"] for r in poly]
            else:
                raise DomainError(f"unsupported geometry {geom['type']}")
            regions.append(PlateRegion(feat["properties"]["name"], rings))
        return regions
    return [PlateRegion(r["name"], r["polygons"]) for r in doc["regions"]]


def assign_plate(event, regions: Sequence[PlateRegion]) -> Optional[str]:
    """Name of the first region containing the event, or None."""
    lon, lat = (event.longitude, event.latitude) if isinstance(event, EventRecord) else event
    for region in regions:
        if region.contains(lon, lat):
            return region.name
    return None


def assign_plates(events: Iterable[EventRecord], regions: Sequence[PlateRegion]) -> list:
    return [assign_plate(e, regions) for e in events]


@dataclass
class BinningSpec:
    """Window width (hours), time range ``[start, end)`` and magnitude band.

    The band is ``[mag_lo, mag_hi)``, or ``[mag_lo, mag_hi]`` when
    ``hi_inclusive``; ``mag_hi=None`` means unbounded.
    """

    window_hours: float
    start: datetime
    end: datetime
    mag_lo: float = -math.inf
    mag_hi: Optional[float] = None
    hi_inclusive: bool = False

    def __post_init__(self):
        self.start = _parse_utc(self.start) if isinstance(self.start, str) else _utc(self.start)
        self.end = _parse_utc(self.end) if isinstance(self.end, str) else _utc(self.end)
        if not self.window_hours > 0:
            raise DomainError("window must be positive")
        if not self.start < self.end:
            raise DomainError("start must precede end")

    @property
    def width(self) -> timedelta:
        return timedelta(hours=self.window_hours)

    @property
    def n_windows(self) -> int:
        return math.ceil((self.end - self.start) / self.width)

    def in_band(self, mag: float) -> bool:
        if mag < self.mag_lo:
            return False
        if self.mag_hi is None:
            return True
        return mag <= self.mag_hi if self.hi_inclusive else mag < self.mag_hi

    def window_index(self, t: datetime) -> Optional[int]:
        if t < self.start or t >= self.end:
            return None
        return int((t - self.start) // self.width)

    def window_starts(self) -> list:
        return [self.start + k * self.width for k in range(self.n_windows)]


def _utc(t: datetime) -> datetime:
    return t.replace(tzinfo=timezone.utc) if t.tzinfo is None else t.astimezone(timezone.utc)


def _tally(columns: Sequence[Iterable[EventRecord]], spec: BinningSpec) -> np.ndarray:
    counts = np.zeros((spec.n_windows, len(columns)), dtype=np.int64)
    for c, events in enumerate(columns):
        for e in events:
            k = spec.window_index(e.time)
            if k is not None:
                counts[k, c] += 1
    return counts


def bin_counts(events: Sequence[EventRecord], regions, spec: BinningSpec, plates: Sequence[str]) -> CountSeries:
    """Dense count series of in-band events for each named plate.

    ``regions`` is either a list of :class:`PlateRegion` or a list of plate
    labels aligned with ``events`` (already assigned).
    """
    if regions and isinstance(regions[0], PlateRegion):
        labels = assign_plates(events, regions)
        known = {r.name for r in regions}
    else:
        labels = list(regions)
        if len(labels) != len(events):
            raise DomainError("one plate label per event is required")
        known = {lab for lab in labels if lab is not None}
    unknown = [p for p in plates if p not in known]
    if unknown and (not regions or isinstance(regions[0], PlateRegion)):
        raise DomainError(f"unknown plate identifier(s): {', '.join(unknown)}")
    cols = [[e for e, lab in zip(events, labels) if lab == p and spec.in_band(e.magnitude)] for p in plates]
    return CountSeries(_tally(cols, spec), spec.window_starts(), list(plates))


def magnitude_split(events: Iterable[EventRecord], lo: float = 5.0, mid: float = 6.0):
    """Split into ``lo <= M <= mid`` and ``M > mid``; smaller events are dropped."""
    if not lo < mid:
        raise DomainError("lo must be below mid")
    medium, large = [], []
    for e in events:
        if lo <= e.magnitude <= mid:
            medium.append(e)
        elif e.magnitude > mid:
            large.append(e)
    return medium, large


def bin_magnitude_bands(events: Sequence[EventRecord], spec: BinningSpec, lo: float = 5.0, mid: float = 6.0,
                        plate: Optional[str] = None, regions=None) -> CountSeries:
    """Two-column series (medium, large) for one plate, or all events if no plate."""
    if plate is not None:
        if regions is None:
            raise DomainError("regions are needed to select a plate")
        events = [e for e in events if assign_plate(e, regions) == plate]
    medium, large = magnitude_split(events, lo, mid)
    return CountSeries(_tally([medium, large], spec), spec.window_starts(), ["medium", "large"])
