"""Dataset readers and writers.

Reads CSV/TSV files carrying a WKT column and GeoJSON FeatureCollections,
skipping corrupt records with per-cause counts.  MULTI geometries are
exploded into their parts; all parts share the record's uri, and ids are
assigned densely over successfully parsed geometries.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .errors import FormatError, GeometryError, IoFailure
from .geometry import Geometry

CSV_WKT = "csv-wkt"
TSV_WKT = "tsv-wkt"
GEOJSON = "geojson"

SKIP_PARSE_ERROR = "parse_error"
SKIP_UNSUPPORTED = "unsupported_type"
SKIP_EMPTY = "empty_geometry"


@dataclass
class DatasetDescriptor:
    """Where and how to read one dataset."""

    path: str
    format: Optional[str] = None  # inferred from the extension when None
    geometry_column: Optional[int] = None  # autodetected when None
    delimiter: Optional[str] = None
    has_header: bool = False

    def resolved_format(self) -> str:
        if self.format:
            return self.format
        suffix = Path(self.path).suffix.lower()
        if suffix in (".geojson", ".json"):
            return GEOJSON
        if suffix == ".csv":
            return CSV_WKT
        return TSV_WKT

    def resolved_delimiter(self) -> str:
        if self.delimiter:
            return self.delimiter
        return "," if self.resolved_format() == CSV_WKT else "\t"


@dataclass
class GeometryProfile:
    """A parsed geometry plus the textual payload of its source record."""

    geometry: Geometry
    uri: Optional[str] = None
    attributes: tuple = ()

    @property
    def key(self) -> str:
        """Identifier used in output triples: the uri when present."""
        return self.uri if self.uri is not None else str(self.geometry.id)


@dataclass
class SkipReport:
    counts: Counter = field(default_factory=Counter)

    def record(self, cause: str):
        self.counts[cause] += 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())


_WKT_TAG = re.compile(r"\s*([A-Za-z]+)\s*(.*)", re.DOTALL)
_NUMBER_SPLIT = re.compile(r"[ \t]+")


def _parse_coord_seq(body: str) -> list[tuple[float, float]]:
    pts = []
    for token in body.split(","):
        token = token.strip()
        if not token:
            raise GeometryError("empty coordinate token")
        parts = _NUMBER_SPLIT.split(token)
        if len(parts) < 2:
            raise GeometryError(f"coordinate needs x and y: {token!r}")
        pts.append((float(parts[0]), float(parts[1])))
    return pts


def _split_groups(body: str) -> list[str]:
    """Split a parenthesized group list at depth zero: '(a),(b)' -> [a, b]."""
    groups = []
    depth = 0
    start = None
    for i, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise GeometryError("unbalanced parentheses in WKT")
            if depth == 0:
                groups.append(body[start:i])
        elif depth == 0 and not ch.isspace() and ch != ",":
            raise GeometryError(f"unexpected character {ch!r} in WKT")
    if depth != 0:
        raise GeometryError("unbalanced parentheses in WKT")
    return groups


def parse_wkt(text: str) -> list[tuple[str, list]]:
    """Parse one WKT literal into [(kind, payload), ...] parts.

    kind is 'linestring' (payload: coord list) or 'polygon' (payload:
    ring list); MULTI types yield one entry per part.  Unsupported tags
    raise GeometryError with a marker so callers can classify the skip.
    """
    m = _WKT_TAG.match(text)
    if not m:
        raise GeometryError(f"not a WKT literal: {text[:40]!r}")
    tag = m.group(1).upper()
    body = m.group(2).strip()
    if body.upper() == "EMPTY" or not body:
        raise GeometryError("EMPTY geometry", )
    if tag == "LINESTRING":
        return [("linestring", _parse_coord_seq(_only_group(body)))]
    if tag == "POLYGON":
        return [("polygon", [_parse_coord_seq(g) for g in _split_groups(_strip_outer(body))])]
    if tag == "MULTILINESTRING":
        return [("linestring", _parse_coord_seq(g)) for g in _split_groups(_strip_outer(body))]
    if tag == "MULTIPOLYGON":
        out = []
        for poly in _split_groups(_strip_outer(body)):
            out.append(("polygon", [_parse_coord_seq(g) for g in _split_groups(poly)]))
        return out
    raise GeometryError(f"unsupported:{tag}")


def _strip_outer(body: str) -> str:
    body = body.strip()
    if not body.startswith("(") or not body.endswith(")"):
        raise GeometryError("malformed WKT body")
    return body[1:-1]


def _only_group(body: str) -> str:
    return _strip_outer(body)


def _build_geometry(gid: int, kind: str, payload) -> Geometry:
    if kind == "linestring":
        return Geometry.linestring(gid, payload)
    return Geometry.polygon(gid, payload)


def _profiles_from_wkt(
    gid: int, wkt: str, uri: Optional[str], attributes: tuple, skips: SkipReport
) -> list[GeometryProfile]:
    """Parse one WKT record; returns [] and counts the skip on failure."""
    try:
        parts = parse_wkt(wkt)
    except GeometryError as exc:
        msg = str(exc)
        if msg.startswith("unsupported:"):
            skips.record(SKIP_UNSUPPORTED)
        elif msg.startswith("EMPTY"):
            skips.record(SKIP_EMPTY)
        else:
            skips.record(SKIP_PARSE_ERROR)
        return []
    out = []
    for offset, (kind, payload) in enumerate(parts):
        try:
            out.append(GeometryProfile(_build_geometry(gid + len(out), kind, payload), uri, attributes))
        except GeometryError:
            skips.record(SKIP_PARSE_ERROR)
    return out


def _detect_geometry_column(row: list[str]) -> int:
    for i, cell in enumerate(row):
        head = cell.strip().upper()
        if head.startswith(("POLYGON", "LINESTRING", "MULTIPOLYGON", "MULTILINESTRING", "POINT", "MULTIPOINT")):
            return i
    raise FormatError("no WKT column detected in first record")


def _iter_delimited(d: DatasetDescriptor, skips: SkipReport) -> Iterator[GeometryProfile]:
    try:
        fh = open(d.path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(f"cannot read {d.path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=d.resolved_delimiter())
        header = None
        geom_col = d.geometry_column
        gid = 0
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if d.has_header and header is None:
                header = row
                continue
            if geom_col is None:
                geom_col = _detect_geometry_column(row)
            if geom_col >= len(row):
                skips.record(SKIP_PARSE_ERROR)
                continue
            wkt = row[geom_col].strip()
            uri = None
            attrs = []
            for i, cell in enumerate(row):
                if i == geom_col:
                    continue
                name = header[i] if header and i < len(header) else f"col{i}"
                if uri is None:
                    uri = cell.strip()
                else:
                    attrs.append((name, cell))
            for profile in _profiles_from_wkt(gid, wkt, uri, tuple(attrs), skips):
                gid = profile.geometry.id + 1
                yield profile


def _iter_geojson(d: DatasetDescriptor, skips: SkipReport) -> Iterator[GeometryProfile]:
    try:
        with open(d.path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {d.path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {d.path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise FormatError("GeoJSON root must be a FeatureCollection")
    gid = 0
    for feature in doc.get("features", []):
        geom = feature.get("geometry") or {}
        gtype = geom.get("type", "")
        coords = geom.get("coordinates")
        props = feature.get("properties") or {}
        uri = feature.get("id", props.get("id"))
        uri = str(uri) if uri is not None else None
        attrs = tuple((k, str(v)) for k, v in props.items() if k != "id")
        parts: list[tuple[str, list]] = []
        try:
            if coords in (None, []):
                skips.record(SKIP_EMPTY)
                continue
            if gtype == "LineString":
                parts = [("linestring", coords)]
            elif gtype == "MultiLineString":
                parts = [("linestring", c) for c in coords]
            elif gtype == "Polygon":
                parts = [("polygon", coords)]
            elif gtype == "MultiPolygon":
                parts = [("polygon", c) for c in coords]
            else:
                skips.record(SKIP_UNSUPPORTED)
                continue
        except (TypeError, KeyError):
            skips.record(SKIP_PARSE_ERROR)
            continue
        for kind, payload in parts:
            try:
                yield GeometryProfile(_build_geometry(gid, kind, payload), uri, attrs)
                gid += 1
            except GeometryError:
                skips.record(SKIP_PARSE_ERROR)


def stream_dataset(d: DatasetDescriptor, skips: Optional[SkipReport] = None) -> Iterator[GeometryProfile]:
    """Stream profiles with bounded memory; ids are stable across reads."""
    if skips is None:
        skips = SkipReport()
    if d.resolved_format() == GEOJSON:
        return _iter_geojson(d, skips)
    return _iter_delimited(d, skips)


def read_dataset(d: DatasetDescriptor) -> tuple[list[GeometryProfile], SkipReport]:
    """Eagerly read every valid record; returns the skip tally alongside."""
    skips = SkipReport()
    profiles = list(stream_dataset(d, skips))
    return profiles, skips


def stream_target(d: DatasetDescriptor, skips: Optional[SkipReport] = None) -> Iterator[GeometryProfile]:
    """Alias of stream_dataset; the memory-frugal verification path."""
    return stream_dataset(d, skips)


def count_fast(d: DatasetDescriptor) -> int:
    """Cheap size proxy for swap decisions: file size in bytes."""
    try:
        return Path(d.path).stat().st_size
    except OSError as exc:
        raise IoFailure(f"cannot stat {d.path}: {exc}") from exc


def write_links(links, path) -> int:
    """Write triples as TSV lines `source<TAB>relation<TAB>target`."""
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for source, relation, target in links:
                fh.write(f"{source}\t{relation}\t{target}\n")
                count += 1
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return count


def write_report(report: dict, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
