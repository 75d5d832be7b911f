"""Partition-based filtering: Plane Sweep (list or striped sweep
structure), PBSM, and Stripe Sweep (hash-map or STR-tree stripes).

All variants emit exactly the MBR-intersecting (source id, target id)
pairs, each once.  Event order is ascending x_min with ties broken by
(dataset tag, id) so streams are reproducible.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

from .errors import EmptyDataset
from .geometry import Geometry, Mbr, mbr_intersects
from .trees import STRTree

LIST_SWEEP = "list"
STRIPED_SWEEP = "striped"
STRIPE_MAP = "map"
STRIPE_STR = "str"


def _y_overlap(a: Mbr, b: Mbr) -> bool:
    return a.y_min <= b.y_max and b.y_min <= a.y_max


def average_width(geoms: Sequence[Geometry]) -> float:
    """Mean MBR width with a unit fallback for point-like data."""
    if not geoms:
        raise EmptyDataset("no geometries")
    w = sum(g.mbr.width for g in geoms) / len(geoms)
    return w if w > 0.0 else 1.0


def _events(source: Sequence[Geometry], target: Sequence[Geometry]):
    evts = [(g.mbr.x_min, 0, g.id, g) for g in source]
    evts.extend((g.mbr.x_min, 1, g.id, g) for g in target)
    evts.sort(key=lambda e: (e[0], e[1], e[2]))
    return evts


def _list_sweep_pairs(events) -> Iterator[tuple[int, int]]:
    active = ([], [])  # per dataset tag
    for x, tag, _, g in events:
        other = active[1 - tag]
        # expire geometries the sweep line has passed
        other[:] = [o for o in other if o.mbr.x_max >= x]
        for o in other:
            if _y_overlap(g.mbr, o.mbr):
                yield (g.id, o.id) if tag == 0 else (o.id, g.id)
        active[tag].append(g)


def _striped_sweep_pairs(events, source: Sequence[Geometry]) -> Iterator[tuple[int, int]]:
    width = average_width(source)
    stripes: dict[int, tuple[list, list]] = {}
    for x, tag, _, g in events:
        lo = math.floor(g.mbr.x_min / width)
        hi = math.floor(g.mbr.x_max / width)
        for k in range(lo, hi + 1):
            stripe = stripes.get(k)
            if stripe is None:
                stripe = ([], [])
                stripes[k] = stripe
            other = stripe[1 - tag]
            other[:] = [o for o in other if o[0].mbr.x_max >= x]
            for o, olo in other:
                # emit in the first stripe both MBRs share
                if k == max(lo, olo) and _y_overlap(g.mbr, o.mbr):
                    yield (g.id, o.id) if tag == 0 else (o.id, g.id)
            stripe[tag].append((g, lo))


def plane_sweep(
    source: Sequence[Geometry],
    target: Sequence[Geometry],
    structure: str = LIST_SWEEP,
) -> Iterator[tuple[int, int]]:
    """Sweep both datasets along x, pairing simultaneously active
    geometries that also overlap on y."""
    source = list(source)
    target = list(target)
    if not source or not target:
        raise EmptyDataset("plane sweep needs both datasets")
    events = _events(source, target)
    if structure == STRIPED_SWEEP:
        return _striped_sweep_pairs(events, source)
    return _list_sweep_pairs(events)


def pbsm(
    source: Sequence[Geometry],
    target: Sequence[Geometry],
    nx: int = 64,
    ny: int = 64,
    structure: str = LIST_SWEEP,
) -> Iterator[tuple[int, int]]:
    """Partition Based Spatial-Merge: plane sweep inside every partition
    of an nx x ny grid over the data extent, deduplicated with the
    reference point technique."""
    source = list(source)
    target = list(target)
    if not source or not target:
        raise EmptyDataset("pbsm needs both datasets")
    if nx < 1 or ny < 1:
        raise ValueError("partition counts must be >= 1")
    boxes = [g.mbr for g in source + target]
    x0 = min(b.x_min for b in boxes)
    y0 = min(b.y_min for b in boxes)
    x1 = max(b.x_max for b in boxes)
    y1 = max(b.y_max for b in boxes)
    pw = (x1 - x0) / nx or 1.0
    ph = (y1 - y0) / ny or 1.0

    def cell_range(mbr: Mbr):
        cx0 = min(max(int((mbr.x_min - x0) / pw), 0), nx - 1)
        cx1 = min(max(int((mbr.x_max - x0) / pw), 0), nx - 1)
        cy0 = min(max(int((mbr.y_min - y0) / ph), 0), ny - 1)
        cy1 = min(max(int((mbr.y_max - y0) / ph), 0), ny - 1)
        return cx0, cx1, cy0, cy1

    def owner(a: Mbr, b: Mbr):
        cx = max(a.x_min, b.x_min)
        cy = min(a.y_max, b.y_max)
        return (
            min(max(int((cx - x0) / pw), 0), nx - 1),
            min(max(int((cy - y0) / ph), 0), ny - 1),
        )

    parts: dict[tuple[int, int], tuple[list, list]] = {}
    for tag, dataset in enumerate((source, target)):
        for g in dataset:
            cx0, cx1, cy0, cy1 = cell_range(g.mbr)
            for ix in range(cx0, cx1 + 1):
                for iy in range(cy0, cy1 + 1):
                    part = parts.setdefault((ix, iy), ([], []))
                    part[tag].append(g)

    def run() -> Iterator[tuple[int, int]]:
        smap = {g.id: g for g in source}
        tmap = {g.id: g for g in target}
        for key in sorted(parts.keys()):
            psrc, ptgt = parts[key]
            if not psrc or not ptgt:
                continue
            for sid, tid in _list_sweep_pairs(_events(psrc, ptgt)):
                if owner(smap[sid].mbr, tmap[tid].mbr) == key:
                    yield sid, tid

    return run()


class StripeIndex:
    """Vertical stripes over the source dataset, stripe width equal to
    the average source MBR width (clamped so sprawling outliers cannot
    explode the stripe count)."""

    def __init__(self, source: Sequence[Geometry], storage: str = STRIPE_MAP, capacity: int = 16):
        source = list(source)
        if not source:
            raise EmptyDataset("no source geometries to index")
        self.storage = storage
        self.geoms = {g.id: g for g in source}
        width = average_width(source)
        extent = max(g.mbr.x_max for g in source) - min(g.mbr.x_min for g in source)
        if extent > 0:
            width = max(width, extent / (4 * len(source)))
        self.width = width
        members: dict[int, list[Geometry]] = {}
        for g in source:
            lo = math.floor(g.mbr.x_min / width)
            hi = math.floor(g.mbr.x_max / width)
            for k in range(lo, hi + 1):
                members.setdefault(k, []).append(g)
        if storage == STRIPE_STR:
            self.stripes = {k: STRTree.build(gs, capacity) for k, gs in members.items()}
        else:
            self.stripes = {k: sorted(g.id for g in gs) for k, gs in members.items()}

    def stripe_range(self, mbr: Mbr) -> tuple[int, int]:
        return math.floor(mbr.x_min / self.width), math.floor(mbr.x_max / self.width)

    def probe(self, t: Geometry) -> list[int]:
        """Distinct MBR-intersecting source ids across t's stripes."""
        lo, hi = self.stripe_range(t.mbr)
        seen: set[int] = set()
        out: list[int] = []
        for k in range(lo, hi + 1):
            stripe = self.stripes.get(k)
            if stripe is None:
                continue
            if self.storage == STRIPE_STR:
                for sid in stripe.query(t.mbr):
                    if sid not in seen:
                        seen.add(sid)
                        out.append(sid)
            else:
                for sid in stripe:
                    if sid not in seen:
                        seen.add(sid)
                        if mbr_intersects(self.geoms[sid].mbr, t.mbr):
                            out.append(sid)
        out.sort()
        return out


def stripe_sweep_build(source: Sequence[Geometry], storage: str = STRIPE_MAP, capacity: int = 16) -> StripeIndex:
    return StripeIndex(source, storage, capacity)


def stripe_sweep_probe(t: Geometry, stripes: StripeIndex) -> list[int]:
    return stripes.probe(t)


def stripe_sweep(
    source: Sequence[Geometry],
    target: Sequence[Geometry],
    storage: str = STRIPE_MAP,
) -> Iterator[tuple[int, int]]:
    index = stripe_sweep_build(source, storage)
    for t in target:
        for sid in index.probe(t):
            yield sid, t.id
