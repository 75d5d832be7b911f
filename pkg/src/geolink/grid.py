"""Equigrid indexing: dynamic/static granularity, tile assignment,
candidate generation and reference-point deduplication.

Tiles are half-open [i*w, (i+1)*w) x [j*h, (j+1)*h); indices come from
floor division so negative coordinates land in the right tile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import EmptyDataset
from .geometry import Geometry, Mbr, mbr_intersects

BOTH_DATASETS = "both_datasets"
SOURCE_ONLY = "source_only"


@dataclass(frozen=True)
class TileSpan:
    """Inclusive tile-index rectangle covered by an MBR."""

    x_lo: int
    x_hi: int
    y_lo: int
    y_hi: int

    @property
    def count(self) -> int:
        return (self.x_hi - self.x_lo + 1) * (self.y_hi - self.y_lo + 1)

    def tiles(self) -> Iterator[tuple[int, int]]:
        for ix in range(self.x_lo, self.x_hi + 1):
            for iy in range(self.y_lo, self.y_hi + 1):
                yield ix, iy

    def overlap_count(self, other: "TileSpan") -> int:
        dx = min(self.x_hi, other.x_hi) - max(self.x_lo, other.x_lo) + 1
        dy = min(self.y_hi, other.y_hi) - max(self.y_lo, other.y_lo) + 1
        if dx <= 0 or dy <= 0:
            return 0
        return dx * dy


def dynamic_granularity(*datasets: Sequence[Geometry]) -> tuple[float, float]:
    """Average MBR width/height over the given dataset(s).

    Both datasets for RADON-style grids, the source only for GIA.nt.
    A zero mean falls back to the other axis mean, then to 1.
    """
    widths = 0.0
    heights = 0.0
    n = 0
    for ds in datasets:
        for g in ds:
            widths += g.mbr.width
            heights += g.mbr.height
            n += 1
    if n == 0:
        raise EmptyDataset("cannot derive grid granularity from no geometries")
    w = widths / n
    h = heights / n
    if w <= 0.0:
        w = h if h > 0.0 else 1.0
    if h <= 0.0:
        h = w  # w already patched above; stays 1 when both degenerate
    return w, h


class Equigrid:
    """Uniform grid over the plane keyed by (tile_x, tile_y).

    Cell id lists are kept sorted for deterministic iteration.  After
    build() the index is immutable and safe to query concurrently.
    """

    def __init__(self, tile_width: float, tile_height: float):
        if tile_width <= 0 or tile_height <= 0:
            raise ValueError("tile dimensions must be positive")
        self.tile_width = tile_width
        self.tile_height = tile_height
        self.source_cells: dict[tuple[int, int], list[int]] = {}
        self.target_cells: dict[tuple[int, int], list[int]] = {}
        self.source_by_id: dict[int, Geometry] = {}
        self.target_by_id: dict[int, Geometry] = {}

    def span_of(self, mbr: Mbr) -> TileSpan:
        return TileSpan(
            math.floor(mbr.x_min / self.tile_width),
            math.floor(mbr.x_max / self.tile_width),
            math.floor(mbr.y_min / self.tile_height),
            math.floor(mbr.y_max / self.tile_height),
        )

    def _add(self, cells, g: Geometry):
        for tile in self.span_of(g.mbr).tiles():
            cells.setdefault(tile, []).append(g.id)

    def add_source(self, g: Geometry):
        self.source_by_id[g.id] = g
        self._add(self.source_cells, g)

    def add_target(self, g: Geometry):
        self.target_by_id[g.id] = g
        self._add(self.target_cells, g)

    def finish(self):
        for cells in (self.source_cells, self.target_cells):
            for ids in cells.values():
                ids.sort()
        return self

    def nonempty_tiles(self) -> int:
        return len(self.source_cells.keys() | self.target_cells.keys())

    def reference_tile(self, a: Mbr, b: Mbr) -> tuple[int, int]:
        """Tile owning the top-left corner of the MBR intersection."""
        cx = max(a.x_min, b.x_min)
        cy = min(a.y_max, b.y_max)
        return math.floor(cx / self.tile_width), math.floor(cy / self.tile_height)

    def candidates_for(self, t: Geometry) -> list[int]:
        """Distinct source ids co-tiled with t whose MBRs intersect t's."""
        span = self.span_of(t.mbr)
        seen = set()
        out = []
        for tile in span.tiles():
            ids = self.source_cells.get(tile)
            if not ids:
                continue
            for sid in ids:
                if sid not in seen:
                    seen.add(sid)
                    if mbr_intersects(self.source_by_id[sid].mbr, t.mbr):
                        out.append(sid)
        out.sort()
        return out


def tiles_for(mbr: Mbr, grid: Equigrid) -> TileSpan:
    return grid.span_of(mbr)


def reference_point_owner(a: Mbr, b: Mbr, grid: Equigrid) -> tuple[int, int]:
    return grid.reference_tile(a, b)


def build_index(
    source: Sequence[Geometry],
    mode: str = SOURCE_ONLY,
    target: Optional[Sequence[Geometry]] = None,
    tile_width: Optional[float] = None,
    tile_height: Optional[float] = None,
) -> Equigrid:
    """Build an Equigrid over the source (and target when both_datasets).

    Dynamic granularity is derived from the indexed dataset(s) unless a
    static tile size is supplied.
    """
    source = list(source)
    if not source:
        raise EmptyDataset("no source geometries to index")
    if mode == BOTH_DATASETS:
        target = list(target or [])
        if tile_width is None or tile_height is None:
            w, h = dynamic_granularity(source, target)
        else:
            w, h = tile_width, tile_height
        grid = Equigrid(w, h)
        for g in source:
            grid.add_source(g)
        for g in target:
            grid.add_target(g)
    else:
        if tile_width is None or tile_height is None:
            w, h = dynamic_granularity(source)
        else:
            w, h = tile_width, tile_height
        grid = Equigrid(w, h)
        for g in source:
            grid.add_source(g)
    return grid.finish()


def radon_join(
    source: Sequence[Geometry],
    target: Sequence[Geometry],
    tile_width: Optional[float] = None,
    tile_height: Optional[float] = None,
) -> Iterator[tuple[int, int]]:
    """Tile-major stream of MBR-intersecting (source id, target id)
    pairs, each emitted exactly once via the reference-point rule."""
    source = list(source)
    target = list(target)
    if not source or not target:
        raise EmptyDataset("radon join needs both datasets")
    grid = build_index(source, BOTH_DATASETS, target, tile_width, tile_height)
    return radon_pairs(grid)


def radon_pairs(grid: Equigrid) -> Iterator[tuple[int, int]]:
    """Iterate a built both-dataset grid tile-major with ref-point dedup."""
    for tile in sorted(grid.source_cells.keys() & grid.target_cells.keys()):
        for sid in grid.source_cells[tile]:
            s = grid.source_by_id[sid]
            for tid in grid.target_cells[tile]:
                t = grid.target_by_id[tid]
                if mbr_intersects(s.mbr, t.mbr) and grid.reference_tile(s.mbr, t.mbr) == tile:
                    yield sid, tid
