"""Geometry model: LineStrings and Polygons with cached MBRs.

Coordinates are planar Cartesian float64 pairs.  Polygons are stored
with a normalized ring orientation (exterior ring counter-clockwise,
holes clockwise) so that the polygon interior always lies to the left
of the directed boundary; the relate kernel depends on this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import GeometryError

LINESTRING = "linestring"
POLYGON = "polygon"

Coord = tuple[float, float]


@dataclass(frozen=True, slots=True)
class Mbr:
    """Axis-aligned minimum bounding rectangle."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise GeometryError(f"inverted MBR {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width * self.height

    def intersects(self, other: "Mbr") -> bool:
        # boundary contact counts as intersecting (closed intervals)
        return (
            self.x_min <= other.x_max
            and other.x_min <= self.x_max
            and self.y_min <= other.y_max
            and other.y_min <= self.y_max
        )

    def intersection_area(self, other: "Mbr") -> float:
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if w <= 0.0 or h <= 0.0:
            return 0.0
        return w * h


def mbr_intersects(a: Mbr, b: Mbr) -> bool:
    return a.intersects(b)


def _validate_coords(coords: Sequence[Coord], what: str) -> list[Coord]:
    cleaned: list[Coord] = []
    for pt in coords:
        try:
            x = float(pt[0])
            y = float(pt[1])
        except (TypeError, ValueError, IndexError):
            raise GeometryError(f"{what}: malformed coordinate {pt!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"{what}: non-finite coordinate ({x}, {y})")
        if cleaned and cleaned[-1] == (x, y):
            continue  # drop consecutive duplicates
        cleaned.append((x, y))
    return cleaned


def signed_area(ring: Sequence[Coord]) -> float:
    """Shoelace signed area; positive for counter-clockwise rings.

    The float result is trusted only when it clears a relative error
    bound; otherwise the sign is recomputed with exact rationals (the
    orientation of near-degenerate slivers must not flip).
    """
    terms = []
    mag = 0.0
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        t = x1 * y2 - x2 * y1
        terms.append(t)
        mag += abs(x1 * y2) + abs(x2 * y1)
    total = math.fsum(terms)
    if abs(total) > 1e-9 * mag or mag == 0.0:
        return 0.5 * total
    exact = Fraction(0)
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        exact += Fraction(x1) * Fraction(y2) - Fraction(x2) * Fraction(y1)
    if exact > 0:
        return 0.5 * abs(total) if total != 0.0 else 1e-300
    if exact < 0:
        return -0.5 * abs(total) if total != 0.0 else -1e-300
    return 0.0


class Geometry:
    """A LineString or Polygon with a dataset-local integer id.

    Immutable after construction; safe to share across workers.
    """

    __slots__ = ("id", "kind", "path", "rings", "mbr", "point_count", "_rings_ok")

    def __init__(self, gid: int, kind: str, path, rings):
        self.id = gid
        self.kind = kind
        self.path = path
        self.rings = rings
        coords: list[Coord] = []
        if kind == LINESTRING:
            coords.extend(path)
            self.point_count = len(path)
        else:
            n = 0
            for ring in rings:
                coords.extend(ring)
                n += len(ring)
            self.point_count = n
        xs = [c[0] for c in coords]
        ys = [c[1] for c in coords]
        self.mbr = Mbr(min(xs), min(ys), max(xs), max(ys))
        self._rings_ok = None  # lazily verified by the relate wrapper

    @classmethod
    def linestring(cls, gid: int, coords: Iterable[Coord]) -> "Geometry":
        pts = _validate_coords(list(coords), "linestring")
        if len(pts) < 2:
            raise GeometryError("linestring needs at least 2 distinct coordinates")
        return cls(gid, LINESTRING, tuple(pts), None)

    @classmethod
    def polygon(cls, gid: int, rings: Iterable[Sequence[Coord]]) -> "Geometry":
        norm: list[tuple[Coord, ...]] = []
        for k, raw in enumerate(rings):
            ring = _validate_coords(list(raw), "polygon ring")
            if ring and ring[0] != ring[-1]:
                # accept unclosed input rings, close them explicitly
                ring.append(ring[0])
            if len(ring) < 4:
                raise GeometryError("polygon ring needs at least 4 coordinates with first == last")
            area = signed_area(ring)
            want_ccw = k == 0  # exterior CCW, holes CW
            if (area > 0) != want_ccw and area != 0.0:
                ring.reverse()
            norm.append(tuple(ring))
        if not norm:
            raise GeometryError("polygon needs an exterior ring")
        return cls(gid, POLYGON, None, tuple(norm))

    @property
    def dimension(self) -> int:
        return 2 if self.kind == POLYGON else 1

    @property
    def is_closed_line(self) -> bool:
        return self.kind == LINESTRING and self.path[0] == self.path[-1]

    def curves(self) -> tuple:
        """Boundary curves: the path for a line, all rings for a polygon."""
        if self.kind == LINESTRING:
            return (self.path,)
        return self.rings

    def __repr__(self):
        return f"Geometry(id={self.id}, kind={self.kind}, mbr={self.mbr})"


def mbr_of(geometry: Geometry) -> Mbr:
    """Tightest axis-aligned box containing all vertices (cached)."""
    return geometry.mbr
