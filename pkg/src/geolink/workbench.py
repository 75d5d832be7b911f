"""Benchmark workbench: brute-force oracle, algorithm documentation
registry, benchmark suites, parameter grid search, synthetic dataset
generation, and the compiled-vs-interpreted kernel comparison.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import batch as batchmod
from . import kernel as kernelmod
from . import progressive as progmod
from .batch import AlgorithmConfig, LinkSet, interlink
from .dataio import GeometryProfile
from .errors import CapExceeded, ConfigError, DegenerateGeometry
from .geometry import Geometry, mbr_intersects
from .relations import verify_pair

REPORT_SCHEMA_VERSION = 1


def brute_force_oracle(source, target, cap: int = 10**6) -> LinkSet:
    """Ground truth: nested loop, MBR filter, verify_pair, with the same
    emission convention as the pipeline."""
    source = list(source)
    target = list(target)
    if len(source) * len(target) > cap:
        raise CapExceeded(f"{len(source)}x{len(target)} exceeds oracle cap {cap}")
    linkset = LinkSet()
    for sp in source:
        for tp in target:
            if not mbr_intersects(sp.geometry.mbr, tp.geometry.mbr):
                continue
            linkset.verified_pairs += 1
            try:
                rels = verify_pair(sp.geometry, tp.geometry)
            except DegenerateGeometry:
                linkset.degenerate_pairs += 1
                continue
            if rels:
                linkset.add_pair(sp.key, tp.key, rels)
    return linkset


# ---------------------------------------------------------------------------
# documentation registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterDoc:
    name: str
    description: str
    default: object
    minimum: object = None
    maximum: object = None
    choices: Optional[tuple] = None

    def grid_values(self) -> list:
        """Candidate values for grid search: the enumerated choices, or
        min, default, max plus the geometric midpoints between them."""
        if self.choices is not None:
            return list(self.choices)
        if self.minimum is None or self.maximum is None:
            return [self.default]
        vals = []
        lo, hi, d = self.minimum, self.maximum, self.default
        def gm(a, b):
            if a <= 0 or b <= 0:
                return (a + b) / 2
            return math.sqrt(a * b)
        raw = [lo, gm(lo, d), d, gm(d, hi), hi]
        is_int = all(isinstance(v, int) for v in (lo, hi, d))
        for v in raw:
            v = int(round(v)) if is_int else float(v)
            if v not in vals:
                vals.append(v)
        return vals


@dataclass(frozen=True)
class AlgorithmDoc:
    name: str
    summary: str
    parameters: tuple[ParameterDoc, ...] = ()
    budget_aware: bool = False

    def configuration(self, overrides: Optional[dict] = None) -> dict:
        config = {p.name: p.default for p in self.parameters}
        config.update(overrides or {})
        return config


_TILE_PARAMS = (
    ParameterDoc("tile_width", "static Equigrid tile width", 100.0, 0.01, 10000.0),
    ParameterDoc("tile_height", "static Equigrid tile height", 100.0, 0.01, 10000.0),
)
_CAPACITY = ParameterDoc("node_capacity", "maximum entries per tree node", 16, 4, 256)

ALGORITHM_DOCS: dict[str, AlgorithmDoc] = {}


def _register(doc: AlgorithmDoc):
    ALGORITHM_DOCS[doc.name] = doc


_register(AlgorithmDoc("radon", "dynamic Equigrid over both datasets; tile-major verification with reference-point dedup"))
_register(AlgorithmDoc("static-radon", "RADON with user-fixed tile dimensions", _TILE_PARAMS))
_register(AlgorithmDoc("giant", "dynamic source-only Equigrid; targets streamed and probed"))
_register(AlgorithmDoc("static-giant", "GIA.nt with user-fixed tile dimensions", _TILE_PARAMS))
_register(AlgorithmDoc(
    "plane-sweep",
    "sort all geometries by x_min and pair simultaneously active ones overlapping on y",
    (ParameterDoc("sweep_structure", "active-geometry container", "list", choices=("list", "striped")),),
))
_register(AlgorithmDoc(
    "pbsm",
    "orthogonal partitions, plane sweep inside each, reference-point dedup",
    (
        ParameterDoc("pbsm_nx", "partition columns", 64, 1, 256),
        ParameterDoc("pbsm_ny", "partition rows", 64, 1, 256),
        ParameterDoc("sweep_structure", "active-geometry container", "list", choices=("list", "striped")),
    ),
))
_register(AlgorithmDoc(
    "stripe-sweep",
    "vertical stripes over the source at average source width; targets probe their stripes",
    (ParameterDoc("stripe_storage", "stripe contents", "map", choices=("map", "str")), _CAPACITY),
))
_register(AlgorithmDoc("rtree", "insertion-built R-tree over source MBRs", (_CAPACITY,)))
_register(AlgorithmDoc("quadtree", "quadrant tree; spanning entries stay at internal nodes", (
    _CAPACITY, ParameterDoc("max_depth", "maximum tree depth", 16, 4, 32))))
_register(AlgorithmDoc("crtree", "STR-packed tree with quantized child boxes", (
    _CAPACITY, ParameterDoc("quant_bits", "bits per quantized offset", 8, 4, 16))))

for _name, _summary in (
    ("pg", "verify the top-budget weighted pairs in descending score"),
    ("dpg", "descending score with reweighting of pending pairs on every hit"),
    ("lpg", "per-target retention quota before the global top-budget cut"),
    ("gog", "harvest candidates from geometries ranked by average weight"),
    ("ipg", "round-robin over ranked geometries, best pair each turn"),
    ("pradon", "RADON tiles ordered by candidate count, weighted inside each tile"),
):
    _register(AlgorithmDoc(
        _name, _summary,
        (
            ParameterDoc("budget", "maximum verifications", 1000, 1, 10**9),
            ParameterDoc("scheme", "weighting scheme", "js", choices=progmod.SCHEMES),
        ),
        budget_aware=True,
    ))


def inspect_algorithm(name: str) -> AlgorithmDoc:
    try:
        return ALGORITHM_DOCS[name]
    except KeyError:
        raise ConfigError(f"no documentation for algorithm {name!r}") from None


# ---------------------------------------------------------------------------
# benchmark runner
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkRow:
    algorithm: str
    params: dict
    t_f_ms: float
    t_v_ms: float
    verified: int = 0
    related: int = 0
    per_relation: dict = field(default_factory=dict)
    precision: Optional[float] = None
    recall: Optional[float] = None
    pgr: Optional[float] = None
    error: Optional[str] = None
    linkset_equal: Optional[bool] = None


@dataclass
class BenchmarkReport:
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"schema_version": REPORT_SCHEMA_VERSION, "rows": []}
        for r in self.rows:
            out["rows"].append({
                "algorithm": r.algorithm,
                "params": r.params,
                "t_f_ms": round(r.t_f_ms, 3),
                "t_v_ms": round(r.t_v_ms, 3),
                "verified": r.verified,
                "related": r.related,
                "per_relation_counts": r.per_relation,
                "precision": r.precision,
                "recall": r.recall,
                "pgr": r.pgr,
                "error": r.error,
                "linkset_equal": r.linkset_equal,
            })
        return out


def _timed_batch(source, target, algorithm, config, repetitions):
    timings = []
    result = None
    for rep in range(max(1, repetitions) + 1):  # first run is a discarded warm-up
        result = interlink(source, target, algorithm, config)
        if rep > 0:
            timings.append(result.timings)
    t_f = sum(t.filtering_s for t in timings) / len(timings)
    t_v = sum(t.verification_s for t in timings) / len(timings)
    return result, t_f, t_v


def run_benchmark(
    source,
    target,
    algorithms: Sequence[str],
    repetitions: int = 1,
    config: Optional[AlgorithmConfig] = None,
    budgets: Optional[Sequence[int]] = None,
    scheme: Optional[progmod.WeightingScheme] = None,
) -> BenchmarkReport:
    """Run each selected algorithm with timing isolation.

    Batch LinkSets are checked for set-equality across rows before the
    report is returned; failures are recorded per row and the suite
    continues.
    """
    report = BenchmarkReport()
    reference: Optional[frozenset] = None
    for name in algorithms:
        if name in batchmod.ALGORITHMS:
            cfg = config or AlgorithmConfig()
            try:
                result, t_f, t_v = _timed_batch(source, target, name, cfg, repetitions)
            except Exception as exc:  # noqa: BLE001 - recorded, suite continues
                report.rows.append(BenchmarkRow(name, {}, 0.0, 0.0, error=repr(exc)))
                continue
            triples = frozenset(result.linkset.triples)
            if reference is None:
                reference = triples
            row = BenchmarkRow(
                name,
                {},
                t_f * 1000.0,
                t_v * 1000.0,
                result.linkset.verified_pairs,
                result.linkset.related_pairs,
                dict(sorted(result.linkset.per_relation.items())),
                linkset_equal=(triples == reference),
            )
            report.rows.append(row)
        elif name in progmod.ALGORITHMS:
            for budget in budgets or (1000,):
                try:
                    res = progmod.progressive_interlink(
                        source, target, name, scheme, budget=budget, auto_swap=True
                    )
                    oracle_related = brute_force_oracle(source, target).related_pairs
                    metrics = progmod.compute_metrics(res.trace, oracle_related, budget)
                except Exception as exc:  # noqa: BLE001
                    report.rows.append(BenchmarkRow(name, {"budget": budget}, 0.0, 0.0, error=repr(exc)))
                    continue
                report.rows.append(BenchmarkRow(
                    name,
                    {"budget": budget},
                    res.timings.filtering_s * 1000.0,
                    res.timings.verification_s * 1000.0,
                    res.linkset.verified_pairs,
                    res.linkset.related_pairs,
                    dict(sorted(res.linkset.per_relation.items())),
                    precision=metrics.precision,
                    recall=metrics.recall,
                    pgr=metrics.pgr,
                ))
        else:
            report.rows.append(BenchmarkRow(name, {}, 0.0, 0.0, error=f"unknown algorithm {name!r}"))
    return report


def benchmark_kernels(source, target, repetitions: int = 1) -> dict:
    """Verify the same candidate set with the compiled and interpreted
    relate kernels; reports per-kernel wall time and result agreement."""
    compiled = kernelmod.implementation()
    interpreted = kernelmod.load_interpreted()
    pairs = []
    for sp in source:
        for tp in target:
            if mbr_intersects(sp.geometry.mbr, tp.geometry.mbr):
                pairs.append((sp.geometry, tp.geometry))

    def flat(g):
        return [[c for pt in curve for c in pt] for curve in g.curves()]

    prepared = [(a.dimension, flat(a), b.dimension, flat(b)) for a, b in pairs]
    out = {"pairs": len(pairs), "agree": True}
    results = {}
    for label, impl in (("compiled", compiled), ("interpreted", interpreted)):
        best = None
        cells = []
        for _ in range(max(1, repetitions)):
            cells = []
            t0 = time.perf_counter()
            for adim, ac, bdim, bc in prepared:
                cells.append(impl.relate(adim, ac, bdim, bc))
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        results[label] = cells
        out[f"{label}_ms"] = round(best * 1000.0, 3)
        out[f"{label}_backend"] = "compiled" if impl.COMPILED else "python"
    out["agree"] = results["compiled"] == results["interpreted"]
    if out["interpreted_ms"]:
        out["speedup"] = round(out["interpreted_ms"] / out["compiled_ms"], 2) if out["compiled_ms"] else None
    return out


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------


def grid_search(
    algorithm: str,
    source,
    target,
    objective: str = "min_runtime",
    budget: Optional[int] = None,
    scheme: Optional[progmod.WeightingScheme] = None,
) -> dict:
    """Exhaustive sweep over the declared parameter domains.

    Budget-agnostic algorithms minimize total runtime; budget-aware ones
    maximize PGR.
    """
    doc = inspect_algorithm(algorithm)
    if objective not in ("min_runtime", "max_pgr"):
        raise ConfigError(f"unknown objective {objective!r}")
    grids = [(p.name, p.grid_values()) for p in doc.parameters if p.name != "budget"]
    combos = [{}]
    for pname, values in grids:
        combos = [dict(c, **{pname: v}) for c in combos for v in values]
    total_related = None
    best = None
    trials = []
    for combo in combos:
        try:
            if doc.budget_aware:
                bu = budget or 1000
                combo_scheme = progmod.WeightingScheme(combo["scheme"]) if "scheme" in combo else (scheme or progmod.WeightingScheme("js"))
                res = progmod.progressive_interlink(source, target, algorithm, combo_scheme, budget=bu)
                if total_related is None:
                    total_related = brute_force_oracle(source, target).related_pairs
                metrics = progmod.compute_metrics(res.trace, total_related, bu)
                score = metrics.pgr
                better = best is None or score > best["score"]
            else:
                fields = AlgorithmConfig.__dataclass_fields__
                cfg = AlgorithmConfig(**{k: v for k, v in combo.items() if k in fields})
                result = interlink(source, target, algorithm, cfg)
                score = result.timings.total_s
                better = best is None or score < best["score"]
        except Exception as exc:  # noqa: BLE001
            trials.append({"params": combo, "error": repr(exc)})
            continue
        trials.append({"params": combo, "score": score})
        if better:
            best = {"params": combo, "score": score}
    if best is None:
        raise ConfigError(f"grid search produced no successful run for {algorithm}")
    return {"algorithm": algorithm, "objective": objective, "best": best, "trials": trials}


# ---------------------------------------------------------------------------
# synthetic datasets
# ---------------------------------------------------------------------------

SYNTH_PROFILES = ("uniform", "clustered", "skewed")


def synth_profiles(
    profile: str,
    count: int,
    seed: int,
    tag: str = "g",
    span: Optional[float] = None,
    overlap: float = 1.0,
    line_fraction: float = 0.3,
    centers_seed: Optional[int] = None,
) -> list[GeometryProfile]:
    """Deterministic synthetic dataset (same seed, same geometries).

    clustered packs geometries around shared centers so related-pair
    density rises with `overlap`; generate a source/target pair with
    different seeds but one centers_seed so their clusters coincide.
    skewed concentrates mass near the origin with a power-law spread.
    """
    if profile not in SYNTH_PROFILES:
        raise ConfigError(f"unknown synth profile {profile!r}")
    if span is None:
        factor = 4.0 if profile == "clustered" else 7.0
        span = max(20.0, math.sqrt(count) * factor)
    rng = random.Random(seed)
    centers = None
    if profile == "clustered":
        crng = random.Random(seed if centers_seed is None else centers_seed)
        n_centers = max(1, count // 25)
        centers = [(crng.uniform(0, span), crng.uniform(0, span)) for _ in range(n_centers)]
    out = []
    for i in range(count):
        if profile == "clustered":
            # tight cores of compact geometries (usually related) plus long
            # diagonal lines grazing the clusters (mostly near-misses)
            cx, cy = centers[rng.randrange(len(centers))]
            if rng.random() < 0.2:
                off = rng.uniform(2.0, 8.0) * (1 if rng.random() < 0.5 else -1)
                length = rng.uniform(span / 6, span / 3)
                x0 = cx - length / 2 + rng.uniform(-4, 4)
                y0 = cy - length / 2 + off
                out.append(GeometryProfile(
                    Geometry.linestring(i, [(x0, y0), (x0 + length, y0 + length)]),
                    f"{tag}{i}",
                ))
                continue
            cx += rng.gauss(0.0, 2.5 / overlap)
            cy += rng.gauss(0.0, 2.5 / overlap)
            size = rng.uniform(0.5, 2.5) * overlap
        elif profile == "uniform":
            cx, cy = rng.uniform(0, span), rng.uniform(0, span)
            size = rng.uniform(0.2, 4.0)
        else:  # skewed
            cx = span * rng.random() ** 3
            cy = span * rng.random() ** 3
            size = rng.uniform(0.2, 4.0)
        if rng.random() < line_fraction:
            n = rng.randrange(2, 5)
            pts = [(cx, cy)]
            for _ in range(n - 1):
                px, py = pts[-1]
                pts.append((px + rng.uniform(-size, size), py + rng.uniform(-size, size)))
            pts = [p for k, p in enumerate(pts) if k == 0 or p != pts[k - 1]]
            if len(pts) < 2:
                pts.append((pts[0][0] + size, pts[0][1]))
            geom = Geometry.linestring(i, pts)
        else:
            w = rng.uniform(0.3, 1.0) * size
            h = rng.uniform(0.3, 1.0) * size
            x0, y0 = cx - w / 2, cy - h / 2
            if rng.random() < 0.3:
                # L-shaped polygon
                w2, h2 = w * rng.uniform(0.3, 0.7), h * rng.uniform(0.3, 0.7)
                ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h2), (x0 + w2, y0 + h2),
                        (x0 + w2, y0 + h), (x0, y0 + h), (x0, y0)]
            else:
                ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h), (x0, y0)]
            geom = Geometry.polygon(i, [ring])
        out.append(GeometryProfile(geom, f"{tag}{i}"))
    return out


def _wkt_of(g: Geometry) -> str:
    if g.kind == "linestring":
        coords = ", ".join(f"{x!r} {y!r}" for x, y in g.path)
        return f"LINESTRING ({coords})"
    rings = []
    for ring in g.rings:
        coords = ", ".join(f"{x!r} {y!r}" for x, y in ring)
        rings.append(f"({coords})")
    return f"POLYGON ({', '.join(rings)})"


def synth_generate(
    profile: str,
    source_count: int,
    target_count: int,
    seed: int,
    out_dir,
    **kwargs,
) -> tuple[Path, Path]:
    """Write a deterministic TSV/WKT dataset pair under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kwargs.setdefault("centers_seed", seed)
    paths = []
    for name, count, tag, sub_seed in (
        ("source.tsv", source_count, "s", seed),
        ("target.tsv", target_count, "t", seed + 1),
    ):
        profiles = synth_profiles(profile, count, sub_seed, tag, **kwargs)
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for p in profiles:
                fh.write(f"{p.uri}\t{_wkt_of(p.geometry)}\n")
        paths.append(path)
    return paths[0], paths[1]


def format_report_table(report_dict: dict) -> str:
    header = f"{'algorithm':<14} {'t_f_ms':>10} {'t_v_ms':>10} {'verified':>9} {'related':>8} {'pgr':>6}  notes"
    lines = [header, "-" * len(header)]
    for row in report_dict.get("rows", []):
        pgr = f"{row['pgr']:.3f}" if row.get("pgr") is not None else ""
        notes = row.get("error") or ("" if row.get("linkset_equal") in (None, True) else "LINKSET MISMATCH")
        params = row.get("params") or {}
        name = row["algorithm"] + (f"@{params['budget']}" if "budget" in params else "")
        lines.append(
            f"{name:<14} {row['t_f_ms']:>10.2f} {row['t_v_ms']:>10.2f} "
            f"{row['verified']:>9} {row['related']:>8} {pgr:>6}  {notes}"
        )
    return "\n".join(lines)
