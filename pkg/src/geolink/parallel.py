"""Single-machine multi-worker pipeline: Equigrid partitioning, global
join of overlapping partitions, per-worker local joins.

Partitions are macro-cells of the source-derived Equigrid (a
configurable multiple of the fine tile size) so the number of work
units stays bounded.  The reference-point rule assigns every candidate
pair to exactly one partition, so no pair is verified twice and the
merged LinkSet is identical for any worker count.  In progressive mode
the overall budget is split across units proportionally to their
candidate counts (largest-remainder rounding).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import grid as gridmod
from . import progressive as progmod
from .batch import LinkSet, RunTimings, _Handle, _geoms
from .errors import ConfigError, EmptyDataset, WorkerFailure
from .geometry import Geometry


@dataclass
class Partition:
    pid: tuple[int, int]
    source_ids: list[int] = field(default_factory=list)
    target_ids: list[int] = field(default_factory=list)


@dataclass
class WorkUnit:
    pid: tuple[int, int]
    sources: list
    targets: list
    budget: Optional[int] = None
    candidate_count: int = 0


def _macro_factors(macro) -> tuple[int, int]:
    if isinstance(macro, int):
        return macro, macro
    mx, my = macro
    return int(mx), int(my)


def partition_datasets(
    source: Sequence[Geometry],
    target: Sequence[Geometry],
    macro=8,
    grid_dims: Optional[tuple[float, float]] = None,
) -> tuple[dict, float, float]:
    """Assign both datasets to macro-cells of the source-derived grid.

    macro is the number of fine tiles per partition side (int or an
    (nx, ny) pair).  Returns (partitions keyed by macro cell, fine tile
    width, height).  A geometry lands in every partition its MBR
    overlaps.
    """
    source = list(source)
    if not source:
        raise EmptyDataset("no source geometries to partition")
    if grid_dims is None:
        fw, fh = gridmod.dynamic_granularity(source)
    else:
        fw, fh = grid_dims
    mx, my = _macro_factors(macro)
    mw = fw * mx
    mh = fh * my
    partitions: dict[tuple[int, int], Partition] = {}
    for tag, dataset in ((0, source), (1, list(target))):
        for g in dataset:
            x_lo = math.floor(g.mbr.x_min / mw)
            x_hi = math.floor(g.mbr.x_max / mw)
            y_lo = math.floor(g.mbr.y_min / mh)
            y_hi = math.floor(g.mbr.y_max / mh)
            for ix in range(x_lo, x_hi + 1):
                for iy in range(y_lo, y_hi + 1):
                    part = partitions.setdefault((ix, iy), Partition((ix, iy)))
                    (part.source_ids if tag == 0 else part.target_ids).append(g.id)
    return partitions, fw, fh


def global_join(partitions: dict, workers: int) -> list[list]:
    """Keep partitions holding both datasets; deal them round-robin."""
    units = [pid for pid, part in sorted(partitions.items()) if part.source_ids and part.target_ids]
    lanes = [[] for _ in range(max(1, workers))]
    for i, pid in enumerate(units):
        lanes[i % len(lanes)].append(pid)
    return lanes


def split_budget(budget: int, counts: Sequence[int]) -> list[int]:
    """Largest-remainder split proportional to candidate counts."""
    total = sum(counts)
    if total == 0:
        return [0] * len(counts)
    raw = [budget * c / total for c in counts]
    out = [math.floor(r) for r in raw]
    remainder = budget - sum(out)
    order = sorted(range(len(counts)), key=lambda i: (-(raw[i] - out[i]), i))
    for i in order[:remainder]:
        out[i] += 1
    return out


def _owned_pairs(unit_pid, local_grid, targets, mw, mh):
    """Candidate (sid, tid) pairs whose reference corner falls in this
    macro-cell; the partition-disjoint ownership function."""
    for t in targets:
        for sid in local_grid.candidates_for(t.geometry):
            s = local_grid.source_by_id[sid]
            cx = max(s.mbr.x_min, t.geometry.mbr.x_min)
            cy = min(s.mbr.y_max, t.geometry.mbr.y_max)
            if (math.floor(cx / mw), math.floor(cy / mh)) == unit_pid:
                yield sid, t.geometry.id


def parallel_interlink(
    source,
    target,
    workers: int = 1,
    mode: str = "batch",
    budget: Optional[int] = None,
    scheme: Optional[progmod.WeightingScheme] = None,
    algorithm: str = "pg",
    macro=8,
) -> "ParallelResult":
    """Three-stage parallel run; batch mode reproduces the serial
    LinkSet exactly for any worker count."""
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    if mode not in ("batch", "progressive"):
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "progressive":
        if budget is None or budget < 1:
            raise ConfigError("progressive mode needs a budget >= 1")
        scheme = scheme or progmod.WeightingScheme("js")
        if algorithm not in progmod.ALGORITHMS:
            raise ConfigError(f"unknown progressive algorithm {algorithm!r}")

    timings = RunTimings()
    t0 = time.perf_counter()
    sh, th = _Handle(source), _Handle(target)
    src = sh.load()
    tgt = th.load()
    smap = {p.geometry.id: p for p in src}
    tmap = {p.geometry.id: p for p in tgt}
    sgeoms = _geoms(src)
    tgeoms = _geoms(tgt)
    partitions, fw, fh = partition_datasets(sgeoms, tgeoms, macro)
    mx, my = _macro_factors(macro)
    mw, mh = fw * mx, fh * my
    lanes = global_join(partitions, workers)

    units: list[WorkUnit] = []
    for lane in lanes:
        for pid in lane:
            part = partitions[pid]
            units.append(
                WorkUnit(
                    pid,
                    [smap[i] for i in part.source_ids],
                    [tmap[i] for i in part.target_ids],
                )
            )
    timings.filtering_s = time.perf_counter() - t0

    t1 = time.perf_counter()
    local_grids = {}
    for unit in units:
        grid = gridmod.Equigrid(fw, fh)  # broadcast fine dimensions
        for p in unit.sources:
            grid.add_source(p.geometry)
        grid.finish()
        local_grids[unit.pid] = grid
        unit.candidate_count = sum(1 for _ in _owned_pairs(unit.pid, grid, unit.targets, mw, mh))

    if mode == "progressive":
        budgets = split_budget(budget, [u.candidate_count for u in units])
        for unit, b in zip(units, budgets):
            unit.budget = b

    def run_unit(unit: WorkUnit):
        grid = local_grids[unit.pid]
        local_smap = {p.geometry.id: p for p in unit.sources}
        local_tmap = {p.geometry.id: p for p in unit.targets}
        if mode == "batch":
            linkset = LinkSet()
            trace = None
            from .relations import verify_pair
            from .errors import DegenerateGeometry

            for sid, tid in _owned_pairs(unit.pid, grid, unit.targets, mw, mh):
                linkset.verified_pairs += 1
                try:
                    rels = verify_pair(local_smap[sid].geometry, local_tmap[tid].geometry)
                except DegenerateGeometry:
                    linkset.degenerate_pairs += 1
                    continue
                if rels:
                    linkset.add_pair(local_smap[sid].key, local_tmap[tid].key, rels)
            return linkset, trace
        if unit.budget == 0:
            return LinkSet(), []
        pairs = list(_owned_pairs(unit.pid, grid, unit.targets, mw, mh))
        candidates = []
        for sid, tid in pairs:
            s = local_smap[sid].geometry
            t = local_tmap[tid].geometry
            w1, w2 = progmod.pair_weights(scheme, s, t, grid)
            candidates.append((w1, w2, sid, tid))
        runner = {
            "pg": progmod._run_static,
            "dpg": progmod._run_dynamic,
            "lpg": progmod._run_local,
            "gog": progmod._run_geometry_ordered,
            "ipg": progmod._run_iterative,
        }.get(algorithm)
        if runner is None:  # pradon inside a worker, restricted to owned pairs
            owned = set(pairs)
            radon_grid = gridmod.build_index(
                [p.geometry for p in unit.sources], gridmod.BOTH_DATASETS,
                [p.geometry for p in unit.targets], fw, fh,
            )
            order = progmod.pradon_order(
                radon_grid, scheme, "inc", pair_filter=lambda s, t: (s, t) in owned
            )
            trace, linkset = progmod._verify_ordered(
                iter(order), unit.budget, local_smap, local_tmap, False
            )
            return linkset, trace
        trace, linkset = runner(candidates, unit.budget, local_smap, local_tmap, False)
        return linkset, trace

    results: dict[tuple, tuple] = {}
    if workers == 1:
        for unit in units:
            try:
                results[unit.pid] = run_unit(unit)
            except Exception as exc:  # noqa: BLE001 - surfaced with partition id
                raise WorkerFailure(unit.pid, exc) from exc
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_unit, unit): unit for unit in units}
            for future, unit in futures.items():
                try:
                    results[unit.pid] = future.result()
                except WorkerFailure:
                    raise
                except Exception as exc:  # noqa: BLE001
                    raise WorkerFailure(unit.pid, exc) from exc

    merged = LinkSet()
    trace = []
    for pid in sorted(results):
        linkset, unit_trace = results[pid]
        merged.merge(linkset)
        if unit_trace:
            for step in unit_trace:
                trace.append((len(trace) + 1, step[1], step[2], step[3]))
    timings.verification_s = time.perf_counter() - t1

    counts = [u.candidate_count for u in units]
    return ParallelResult(
        linkset=merged,
        timings=timings,
        workers=workers,
        mode=mode,
        unit_count=len(units),
        skew=(max(counts) if counts else 0, min(counts) if counts else 0),
        trace=trace if mode == "progressive" else None,
        budgets=[u.budget for u in units] if mode == "progressive" else None,
    )


@dataclass
class ParallelResult:
    linkset: LinkSet
    timings: RunTimings
    workers: int
    mode: str
    unit_count: int
    skew: tuple[int, int]
    trace: Optional[list] = None
    budgets: Optional[list] = None
