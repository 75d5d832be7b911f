"""Budget-aware interlinking: Filtering -> Scheduling -> Verification.

Scheduling scores MBR-intersecting candidate pairs from their grid
co-occurrence (CF, JS, chi-square, MBRO, ISP, or a composite of two)
and verifies at most `budget` pairs in descending-score order; the six
algorithms differ in how that order is built and adapted.

Ties break deterministically everywhere: secondary weight, then source
id, then target id.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import grid as gridmod
from .batch import LinkSet, RunTimings, _Handle, _geoms, swap_to_source
from .errors import ConfigError, DegenerateGeometry, EmptyDataset
from .geometry import Geometry
from .relations import transpose_relations, verify_pair

SCHEMES = ("cf", "js", "x2", "mbro", "isp")
ALGORITHMS = ("pg", "dpg", "lpg", "gog", "ipg", "pradon")

MBRO_JACCARD = "jaccard"
MBRO_MIN = "min"


@dataclass(frozen=True)
class WeightingScheme:
    """Primary scheme plus optional secondary tie-breaker (composite)."""

    primary: str
    secondary: Optional[str] = None
    mbro_mode: str = MBRO_JACCARD

    def __post_init__(self):
        if self.primary not in SCHEMES:
            raise ConfigError(f"unknown weighting scheme {self.primary!r}")
        if self.secondary is not None:
            if self.secondary not in SCHEMES:
                raise ConfigError(f"unknown weighting scheme {self.secondary!r}")
            if self.secondary == self.primary:
                raise ConfigError("composite scheme needs two distinct atomic schemes")


def atomic_weight(kind: str, s: Geometry, t: Geometry, grid: gridmod.Equigrid, mbro_mode: str = MBRO_JACCARD) -> float:
    """One atomic score for an MBR-intersecting pair."""
    if kind == "cf" or kind == "js" or kind == "x2":
        span_s = grid.span_of(s.mbr)
        span_t = grid.span_of(t.mbr)
        cf = span_s.overlap_count(span_t)
        if kind == "cf":
            return float(cf)
        if kind == "js":
            union = span_s.count + span_t.count - cf
            return cf / union if union else 0.0
        n1 = span_s.count
        n2 = span_t.count
        total = max(grid.nonempty_tiles(), n1 + n2 - cf)
        obs = (cf, n1 - cf, n2 - cf, total - n1 - n2 + cf)
        rows = (n1, total - n1)
        cols = (n2, total - n2)
        chi = 0.0
        for i in range(2):
            for j in range(2):
                expected = rows[i] * cols[j] / total if total else 0.0
                if expected <= 0.0:
                    return 0.0
                diff = obs[i * 2 + j] - expected
                chi += diff * diff / expected
        return chi
    if kind == "mbro":
        inter = s.mbr.intersection_area(t.mbr)
        if mbro_mode == MBRO_MIN:
            denom = min(s.mbr.area(), t.mbr.area())
        else:
            denom = s.mbr.area() + t.mbr.area() - inter
        if denom <= 0.0:
            return 1.0 if s.mbr == t.mbr else 0.0
        return inter / denom
    if kind == "isp":
        return 1.0 / (s.point_count + t.point_count)
    raise ConfigError(f"unknown weighting scheme {kind!r}")


def pair_weights(scheme: WeightingScheme, s: Geometry, t: Geometry, grid: gridmod.Equigrid) -> tuple[float, float]:
    w1 = atomic_weight(scheme.primary, s, t, grid, scheme.mbro_mode)
    w2 = atomic_weight(scheme.secondary, s, t, grid, scheme.mbro_mode) if scheme.secondary else 0.0
    return w1, w2


def weight(s: Geometry, t: Geometry, grid: gridmod.Equigrid, scheme: WeightingScheme) -> float:
    return pair_weights(scheme, s, t, grid)[0]


# A weighted candidate is (w1, w2, sid, tid); descending weight order is
# ascending (-w1, -w2, sid, tid).
def _order_key(item):
    return (-item[0], -item[1], item[2], item[3])


def candidate_weights(
    grid: gridmod.Equigrid,
    targets: Iterable[Geometry],
    scheme: WeightingScheme,
) -> list[tuple[float, float, int, int]]:
    """Weighted MBR-intersecting pairs from a source-only grid."""
    out = []
    for t in targets:
        for sid in grid.candidates_for(t):
            s = grid.source_by_id[sid]
            w1, w2 = pair_weights(scheme, s, t, grid)
            out.append((w1, w2, sid, t.id))
    return out


def schedule_progressive_giant(candidates: Sequence[tuple], budget: int) -> list[tuple]:
    """Top-`budget` candidates in nonincreasing weight order."""
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    return heapq.nsmallest(budget, candidates, key=_order_key)


@dataclass
class ProgressiveResult:
    trace: list  # (step, source_key, target_key, related)
    linkset: LinkSet
    algorithm: str
    scheme: WeightingScheme
    budget: int
    timings: RunTimings = field(default_factory=RunTimings)
    candidate_count: int = 0

    @property
    def examined(self) -> int:
        return len(self.trace)

    @property
    def related_found(self) -> int:
        return self.linkset.related_pairs


def _verify_ordered(pairs, budget, smap, tmap, swapped) -> tuple[list, LinkSet]:
    linkset = LinkSet()
    trace = []
    for sid, tid in pairs:
        if len(trace) >= budget:
            break
        sprof = smap[sid]
        tprof = tmap[tid]
        linkset.verified_pairs += 1
        try:
            rels = verify_pair(sprof.geometry, tprof.geometry)
        except DegenerateGeometry:
            linkset.degenerate_pairs += 1
            rels = None
        related = bool(rels)
        if rels:
            if swapped:
                linkset.add_pair(tprof.key, sprof.key, transpose_relations(rels))
            else:
                linkset.add_pair(sprof.key, tprof.key, rels)
        if swapped:
            trace.append((len(trace) + 1, tprof.key, sprof.key, related))
        else:
            trace.append((len(trace) + 1, sprof.key, tprof.key, related))
    return trace, linkset


def _run_static(candidates, budget, smap, tmap, swapped):
    ordered = schedule_progressive_giant(candidates, budget)
    return _verify_ordered(((sid, tid) for _, _, sid, tid in ordered), budget, smap, tmap, swapped)


def _run_dynamic(candidates, budget, smap, tmap, swapped):
    """Reweight pending scheduled pairs whenever a related pair is found:
    current = base * (1 + detections(s) + detections(t)), served from a
    lazy-deletion heap so the next examined pair is always the current
    maximum."""
    scheduled = schedule_progressive_giant(candidates, budget)
    base = {(sid, tid): (w1, w2) for w1, w2, sid, tid in scheduled}
    by_source: dict[int, set] = {}
    by_target: dict[int, set] = {}
    for _, _, sid, tid in scheduled:
        by_source.setdefault(sid, set()).add((sid, tid))
        by_target.setdefault(tid, set()).add((sid, tid))
    degree_s: dict[int, int] = {}
    degree_t: dict[int, int] = {}

    current: dict[tuple, tuple] = {}
    heap = []
    for w1, w2, sid, tid in scheduled:
        key = (-w1, -w2, sid, tid)
        current[(sid, tid)] = key
        heapq.heappush(heap, key)

    linkset = LinkSet()
    trace = []
    pending = set(current)
    while heap and len(trace) < budget:
        key = heapq.heappop(heap)
        pair = (key[2], key[3])
        if pair not in pending or current[pair] != key:
            continue  # stale or already examined
        pending.discard(pair)
        sprof = smap[pair[0]]
        tprof = tmap[pair[1]]
        linkset.verified_pairs += 1
        try:
            rels = verify_pair(sprof.geometry, tprof.geometry)
        except DegenerateGeometry:
            linkset.degenerate_pairs += 1
            rels = None
        related = bool(rels)
        if rels:
            if swapped:
                linkset.add_pair(tprof.key, sprof.key, transpose_relations(rels))
            else:
                linkset.add_pair(sprof.key, tprof.key, rels)
        if swapped:
            trace.append((len(trace) + 1, tprof.key, sprof.key, related))
        else:
            trace.append((len(trace) + 1, sprof.key, tprof.key, related))
        if related:
            degree_s[pair[0]] = degree_s.get(pair[0], 0) + 1
            degree_t[pair[1]] = degree_t.get(pair[1], 0) + 1
            affected = by_source.get(pair[0], set()) | by_target.get(pair[1], set())
            for other in affected:
                if other not in pending:
                    continue
                w1, w2 = base[other]
                boost = 1 + degree_s.get(other[0], 0) + degree_t.get(other[1], 0)
                new_key = (-(w1 * boost), -w2, other[0], other[1])
                if new_key != current[other]:
                    current[other] = new_key
                    heapq.heappush(heap, new_key)
    return trace, linkset


def _run_local(candidates, budget, smap, tmap, swapped):
    """Retain a per-target quota of top candidates before the global
    top-budget cut, so every target with candidates stays represented."""
    per_target: dict[int, list] = {}
    for item in candidates:
        per_target.setdefault(item[3], []).append(item)
    if not per_target:
        return [], LinkSet()
    quota = max(1, budget // len(per_target))
    retained = []
    for items in per_target.values():
        retained.extend(heapq.nsmallest(quota, items, key=_order_key))
    ordered = heapq.nsmallest(budget, retained, key=_order_key)
    return _verify_ordered(((sid, tid) for _, _, sid, tid in ordered), budget, smap, tmap, swapped)


def _entity_ranking(candidates):
    """Entities (source or target geometries) by decreasing average
    candidate weight; each entity carries its own descending pair list."""
    by_entity: dict[tuple, list] = {}
    for item in candidates:
        by_entity.setdefault(("s", item[2]), []).append(item)
        by_entity.setdefault(("t", item[3]), []).append(item)
    ranked = []
    for entity, items in by_entity.items():
        avg = sum(it[0] for it in items) / len(items)
        items.sort(key=_order_key)
        ranked.append((-avg, entity[0], entity[1], items))
    ranked.sort(key=lambda r: (r[0], r[1], r[2]))
    return ranked


def _run_geometry_ordered(candidates, budget, smap, tmap, swapped):
    """Harvest candidates entity by entity down the average-weight
    ranking, then verify the harvest in decreasing pair weight."""
    ranked = _entity_ranking(candidates)
    picked = []
    seen = set()
    for _, _, _, items in ranked:
        if len(picked) >= budget:
            break
        for item in items:
            pair = (item[2], item[3])
            if pair not in seen:
                seen.add(pair)
                picked.append(item)
                if len(picked) >= budget:
                    break
    picked.sort(key=_order_key)
    return _verify_ordered(((sid, tid) for _, _, sid, tid in picked), budget, smap, tmap, swapped)


def _run_iterative(candidates, budget, smap, tmap, swapped):
    """Round-robin over the ranked entities, taking each one's next-best
    unexamined pair per turn."""
    ranked = _entity_ranking(candidates)
    queues = [list(reversed(items)) for _, _, _, items in ranked]  # pop() = best next
    order = []
    seen = set()
    alive = True
    while alive and len(order) < budget:
        alive = False
        for queue in queues:
            while queue:
                item = queue[-1]
                pair = (item[2], item[3])
                if pair in seen:
                    queue.pop()
                    continue
                queue.pop()
                seen.add(pair)
                order.append(pair)
                alive = True
                break
            if len(order) >= budget:
                break
    return _verify_ordered(iter(order), budget, smap, tmap, swapped)


def pradon_order(grid, scheme: WeightingScheme, tile_order: str = "inc",
                 pair_filter=None) -> list[tuple[int, int]]:
    """Progressive-RADON schedule: tiles sorted by candidate-pair count
    (increasing or decreasing), reference-point deduplicated pairs inside
    each tile in decreasing score."""
    tiles: dict[tuple, list] = {}
    for tile in sorted(grid.source_cells.keys() & grid.target_cells.keys()):
        bucket = []
        for sid in grid.source_cells[tile]:
            s = grid.source_by_id[sid]
            for tid in grid.target_cells[tile]:
                t = grid.target_by_id[tid]
                if s.mbr.intersects(t.mbr) and grid.reference_tile(s.mbr, t.mbr) == tile:
                    if pair_filter is not None and not pair_filter(sid, tid):
                        continue
                    w1, w2 = pair_weights(scheme, s, t, grid)
                    bucket.append((w1, w2, sid, tid))
        if bucket:
            tiles[tile] = bucket
    if tile_order == "dec":
        ordered_tiles = sorted(tiles.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    else:
        ordered_tiles = sorted(tiles.items(), key=lambda kv: (len(kv[1]), kv[0]))
    order = []
    for _, bucket in ordered_tiles:
        bucket.sort(key=_order_key)
        order.extend((sid, tid) for _, _, sid, tid in bucket)
    return order


def _run_progressive_radon(grid, scheme, budget, smap, tmap, swapped, tile_order):
    order = pradon_order(grid, scheme, tile_order)
    trace, linkset = _verify_ordered(iter(order), budget, smap, tmap, swapped)
    return trace, linkset, len(order)


def progressive_interlink(
    source,
    target,
    algorithm: str = "pg",
    scheme: Optional[WeightingScheme] = None,
    budget: int = 1000,
    tile_order: str = "inc",
    tile_width: Optional[float] = None,
    tile_height: Optional[float] = None,
    auto_swap: bool = True,
) -> ProgressiveResult:
    """Run one budget-aware algorithm; at most `budget` verifications."""
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown progressive algorithm {algorithm!r}")
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    scheme = scheme or WeightingScheme("js")
    swapped = False
    if auto_swap:
        source, target, swapped = swap_to_source(source, target)
    sh, th = _Handle(source), _Handle(target)

    timings = RunTimings()
    t0 = time.perf_counter()
    src = sh.load()
    sgeoms = _geoms(src)
    smap = {p.geometry.id: p for p in src}
    if not sgeoms:
        raise EmptyDataset("no source geometries")
    if algorithm == "pradon":
        # RADON-style filtering indexes both datasets
        tgt = th.load()
        tgeoms = _geoms(tgt)
        grid = gridmod.build_index(sgeoms, gridmod.BOTH_DATASETS, tgeoms, tile_width, tile_height)
    else:
        grid = gridmod.build_index(sgeoms, gridmod.SOURCE_ONLY, None, tile_width, tile_height)
    timings.filtering_s = time.perf_counter() - t0

    t1 = time.perf_counter()
    tgt = th.load()
    tgeoms = _geoms(tgt)
    tmap = {p.geometry.id: p for p in tgt}

    if algorithm == "pradon":
        trace, linkset, n_candidates = _run_progressive_radon(
            grid, scheme, budget, smap, tmap, swapped, tile_order,
        )
    else:
        candidates = candidate_weights(grid, tgeoms, scheme)
        n_candidates = len(candidates)
        runner = {
            "pg": _run_static,
            "dpg": _run_dynamic,
            "lpg": _run_local,
            "gog": _run_geometry_ordered,
            "ipg": _run_iterative,
        }[algorithm]
        trace, linkset = runner(candidates, budget, smap, tmap, swapped)
    timings.verification_s = time.perf_counter() - t1

    return ProgressiveResult(
        trace=trace,
        linkset=linkset,
        algorithm=algorithm,
        scheme=scheme,
        budget=budget,
        timings=timings,
        candidate_count=n_candidates,
    )


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    pgr: float
    zero_flags: frozenset = frozenset()


def compute_metrics(trace: Sequence, total_related: int, budget: int) -> Metrics:
    """Effectiveness of one progressive run.

    precision: related found / examined.  recall: related found divided
    by the best possible within the budget.  PGR: area under the
    cumulative-related curve normalized by the related-first optimum.
    Zero denominators report 0 and are flagged.
    """
    flags = set()
    examined = len(trace)
    related_flags = [bool(step[-1]) for step in trace]
    found = sum(related_flags)
    if examined == 0:
        precision = 0.0
        flags.add("precision")
    else:
        precision = found / examined
    best_possible = min(budget, total_related)
    if best_possible == 0:
        recall = 0.0
        flags.add("recall")
    else:
        recall = found / best_possible
    auc = 0.0
    cum = 0
    for flag in related_flags:
        if flag:
            cum += 1
        auc += cum
    auc_opt = sum(min(i, best_possible) for i in range(1, examined + 1))
    if auc_opt == 0:
        pgr = 0.0
        flags.add("pgr")
    else:
        pgr = auc / auc_opt
    return Metrics(precision, recall, pgr, frozenset(flags))


def write_trace(trace: Sequence, path) -> int:
    """TSV rows: step, source, target, related(0/1)."""
    from .dataio import IoFailure

    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for step, s_key, t_key, related in trace:
                fh.write(f"{step}\t{s_key}\t{t_key}\t{1 if related else 0}\n")
                count += 1
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return count
