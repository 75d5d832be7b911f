"""Budget-agnostic Filtering -> Verification pipeline.

Wires any filtering algorithm to the verification kernel and
accumulates the LinkSet.  Every batch algorithm produces the same links;
they differ only in how candidates are generated and what is held in
memory.  Filtering time covers index construction and in-memory loads;
verification time covers candidate generation, relate calls and, for
memory-frugal algorithms, streamed target reads.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

from . import grid as gridmod
from . import sweep as sweepmod
from . import trees as treemod
from .dataio import DatasetDescriptor, count_fast, read_dataset, stream_target
from .errors import ConfigError, DegenerateGeometry, MemoryBudgetExceeded
from .geometry import Geometry
from .relations import (
    RELATION_NAMES,
    Relation,
    transpose_relations,
    verify_pair,
)

ALGORITHMS = (
    "radon",
    "static-radon",
    "giant",
    "static-giant",
    "plane-sweep",
    "pbsm",
    "stripe-sweep",
    "rtree",
    "quadtree",
    "crtree",
)
MEMORY_INTENSIVE = frozenset({"radon", "static-radon", "plane-sweep", "pbsm"})
MEMORY_FRUGAL = frozenset(a for a in ALGORITHMS if a not in MEMORY_INTENSIVE)

DatasetInput = Union[DatasetDescriptor, list]


@dataclass
class RunTimings:
    filtering_s: float = 0.0
    verification_s: float = 0.0

    @property
    def total_s(self) -> float:
        return self.filtering_s + self.verification_s


class LinkSet:
    """Deduplicated (subject, relation, object) triples plus counters.

    A verified pair (s, t) emits every relation of the source-side
    orientation; when the pair's relation set is direction-dependent
    (contains/within/covers/coveredBy present) the full target-side
    orientation is emitted as well, so hierarchical links are stated for
    both entities while purely symmetric pairs yield one triple per
    relation.
    """

    def __init__(self):
        self.triples: set[tuple[str, str, str]] = set()
        self.per_relation: Counter = Counter()
        self.verified_pairs = 0
        self.related_pairs = 0
        self.degenerate_pairs = 0

    def add_pair(self, s_key: str, t_key: str, rels: Relation):
        if not rels:
            return
        self.related_pairs += 1
        self._emit(s_key, t_key, rels)
        transposed = transpose_relations(rels)
        if transposed != rels:
            self._emit(t_key, s_key, transposed)

    def _emit(self, subject: str, obj: str, rels: Relation):
        for rel in Relation:
            if rels & rel:
                triple = (subject, RELATION_NAMES[rel], obj)
                if triple not in self.triples:
                    self.triples.add(triple)
                    self.per_relation[RELATION_NAMES[rel]] += 1

    def merge(self, other: "LinkSet"):
        for triple in other.triples:
            if triple not in self.triples:
                self.triples.add(triple)
                self.per_relation[triple[1]] += 1
        self.verified_pairs += other.verified_pairs
        self.related_pairs += other.related_pairs
        self.degenerate_pairs += other.degenerate_pairs

    def sorted_triples(self) -> list[tuple[str, str, str]]:
        return sorted(self.triples)

    def __len__(self):
        return len(self.triples)

    def __eq__(self, other):
        return isinstance(other, LinkSet) and self.triples == other.triples


@dataclass
class AlgorithmConfig:
    """Knobs shared by the batch algorithms; unused ones are ignored."""

    tile_width: Optional[float] = None
    tile_height: Optional[float] = None
    sweep_structure: str = sweepmod.LIST_SWEEP
    pbsm_nx: int = 64
    pbsm_ny: int = 64
    stripe_storage: str = sweepmod.STRIPE_MAP
    node_capacity: int = 16
    quant_bits: int = 8
    max_depth: int = 16
    auto_swap: bool = True
    memory_budget: Optional[int] = None
    threads: int = 1


@dataclass
class InterlinkResult:
    linkset: LinkSet
    timings: RunTimings
    algorithm: str
    swapped: bool = False
    source_count: int = 0
    target_count: int = 0
    candidate_count: int = 0

    def report(self, params: Optional[dict] = None) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": params or {},
            "t_f_ms": round(self.timings.filtering_s * 1000.0, 3),
            "t_v_ms": round(self.timings.verification_s * 1000.0, 3),
            "verified": self.linkset.verified_pairs,
            "related": self.linkset.related_pairs,
            "per_relation_counts": dict(sorted(self.linkset.per_relation.items())),
        }


def _available_ram() -> int:
    try:
        with open("/proc/meminfo") as fh:
            for line in fh:
                if line.startswith("MemAvailable:"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    return 4 << 30


def estimate_profile_bytes(profiles: list) -> int:
    # rough per-vertex footprint of the parsed representation
    return sum(160 + 48 * p.geometry.point_count for p in profiles)


class _Handle:
    """Uniform access to a dataset given either a descriptor or a list
    of already-parsed profiles."""

    def __init__(self, data: DatasetInput):
        self.descriptor = data if isinstance(data, DatasetDescriptor) else None
        self.profiles = None if self.descriptor else list(data)

    def load(self) -> list:
        if self.profiles is None:
            self.profiles, _ = read_dataset(self.descriptor)
        return self.profiles

    def stream(self) -> Iterator:
        if self.profiles is not None:
            return iter(self.profiles)
        return stream_target(self.descriptor)

    def size_proxy(self) -> float:
        if self.profiles is not None:
            return float(len(self.profiles))
        return float(count_fast(self.descriptor))

    def byte_estimate(self) -> int:
        if self.profiles is not None:
            return estimate_profile_bytes(self.profiles)
        return count_fast(self.descriptor)


def swap_to_source(source: DatasetInput, target: DatasetInput) -> tuple[DatasetInput, DatasetInput, bool]:
    """Make the smaller dataset the indexed source; ties keep the given
    order.  In-memory datasets compare by count, file-backed by size."""
    sh, th = _Handle(source), _Handle(target)
    if (sh.profiles is None) != (th.profiles is None):
        # mixed inputs: load the file side so counts are comparable
        sh.load()
        th.load()
        source = sh.profiles
        target = th.profiles
    if th.size_proxy() < sh.size_proxy():
        return target, source, True
    return source, target, False


def _geoms(profiles: list) -> list[Geometry]:
    return [p.geometry for p in profiles]


def _check_memory(cfg: AlgorithmConfig, handles: Iterable[_Handle], algorithm: str):
    budget = cfg.memory_budget
    if budget is None:
        budget = int(_available_ram() * 0.75)
    need = sum(h.byte_estimate() for h in handles)
    if need > budget:
        raise MemoryBudgetExceeded(
            f"{algorithm} must hold {need} estimated bytes in memory, budget is {budget}; "
            "use a memory-frugal algorithm (giant, stripe-sweep, a tree index) instead"
        )


def interlink(
    source: DatasetInput,
    target: DatasetInput,
    algorithm: str = "giant",
    config: Optional[AlgorithmConfig] = None,
) -> InterlinkResult:
    """Run one batch algorithm end to end.

    The LinkSet is identical across algorithms; timings and memory
    behavior differ.  Output triples are stated in the original
    source/target orientation even when the engine swaps datasets
    internally.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    cfg = config or AlgorithmConfig()
    if algorithm.startswith("static-") and (cfg.tile_width is None or cfg.tile_height is None):
        raise ConfigError(f"{algorithm} requires explicit tile dimensions")

    swapped = False
    if algorithm in MEMORY_FRUGAL and cfg.auto_swap:
        source, target, swapped = swap_to_source(source, target)
    sh, th = _Handle(source), _Handle(target)

    linkset = LinkSet()
    timings = RunTimings()
    t0 = time.perf_counter()

    if not sh.load():
        return InterlinkResult(linkset, timings, algorithm, swapped)
    if algorithm in MEMORY_INTENSIVE and not th.load():
        return InterlinkResult(linkset, timings, algorithm, swapped,
                               source_count=len(sh.load()))

    if algorithm in MEMORY_INTENSIVE:
        _check_memory(cfg, (sh, th), algorithm)
        src = sh.load()
        tgt = th.load()
        sgeoms = _geoms(src)
        tgeoms = _geoms(tgt)
        smap = {p.geometry.id: p for p in src}
        tmap = {p.geometry.id: p for p in tgt}
        if algorithm in ("radon", "static-radon"):
            grid = gridmod.build_index(
                sgeoms, gridmod.BOTH_DATASETS, tgeoms, cfg.tile_width, cfg.tile_height
            )
            pair_iter = gridmod.radon_pairs(grid)
        elif algorithm == "plane-sweep":
            pair_iter = sweepmod.plane_sweep(sgeoms, tgeoms, cfg.sweep_structure)
        else:  # pbsm
            pair_iter = sweepmod.pbsm(sgeoms, tgeoms, cfg.pbsm_nx, cfg.pbsm_ny, cfg.sweep_structure)
        timings.filtering_s = time.perf_counter() - t0

        t1 = time.perf_counter()
        candidates = ((smap[sid], tmap[tid]) for sid, tid in pair_iter)
        count = _verify_stream(candidates, linkset, swapped, cfg.threads)
        timings.verification_s = time.perf_counter() - t1
        src_n, tgt_n = len(src), len(tgt)
    else:
        src = sh.load()
        sgeoms = _geoms(src)
        smap = {p.geometry.id: p for p in src}
        if algorithm in ("giant", "static-giant"):
            index = gridmod.build_index(
                sgeoms, gridmod.SOURCE_ONLY, None, cfg.tile_width, cfg.tile_height
            )
            probe = index.candidates_for
        elif algorithm == "stripe-sweep":
            index = sweepmod.stripe_sweep_build(sgeoms, cfg.stripe_storage, cfg.node_capacity)
            probe = index.probe
        else:
            tree = treemod.build_tree(
                algorithm, sgeoms, cfg.node_capacity, cfg.quant_bits, cfg.max_depth
            )
            probe = lambda t: tree.query(t.mbr)
        timings.filtering_s = time.perf_counter() - t0

        t1 = time.perf_counter()
        tgt_n = 0

        def frugal_candidates():
            nonlocal tgt_n
            for tprof in th.stream():
                tgt_n += 1
                for sid in probe(tprof.geometry):
                    yield smap[sid], tprof

        count = _verify_stream(frugal_candidates(), linkset, swapped, cfg.threads)
        timings.verification_s = time.perf_counter() - t1
        src_n = len(src)

    return InterlinkResult(
        linkset=linkset,
        timings=timings,
        algorithm=algorithm,
        swapped=swapped,
        source_count=src_n,
        target_count=tgt_n,
        candidate_count=count,
    )


def _verify_one(pair) -> tuple:
    sprof, tprof = pair
    try:
        rels = verify_pair(sprof.geometry, tprof.geometry)
    except DegenerateGeometry:
        return sprof, tprof, None
    return sprof, tprof, rels


def _verify_stream(candidates: Iterable, linkset: LinkSet, swapped: bool, threads: int = 1) -> int:
    """Verify candidate pairs and emit triples in the original dataset
    orientation (engine order is reversed when the run swapped)."""
    count = 0
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(_verify_one, candidates, chunksize=64)
            for sprof, tprof, rels in results:
                count += 1
                linkset.verified_pairs += 1
                _record(linkset, sprof, tprof, rels, swapped)
        return count
    for pair in candidates:
        sprof, tprof, rels = _verify_one(pair)
        count += 1
        linkset.verified_pairs += 1
        _record(linkset, sprof, tprof, rels, swapped)
    return count


def _record(linkset: LinkSet, sprof, tprof, rels, swapped: bool):
    if rels is None:
        linkset.degenerate_pairs += 1
        return
    if not rels:
        return
    if swapped:
        linkset.add_pair(tprof.key, sprof.key, transpose_relations(rels))
    else:
        linkset.add_pair(sprof.key, tprof.key, rels)


def link_triples(linkset: LinkSet) -> list[tuple[str, str, str]]:
    return linkset.sorted_triples()
