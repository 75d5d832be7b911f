"""Command line interface.

Subcommands: interlink, progressive, parallel, bench, grid-search,
synth, report, inspect.  Exit codes: 0 success, 1 run error, 2
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import workbench
from .batch import ALGORITHMS as BATCH_ALGORITHMS
from .batch import AlgorithmConfig, interlink
from .dataio import DatasetDescriptor, write_links, write_report
from .errors import ConfigError, GeolinkError
from .parallel import parallel_interlink
from .progressive import (
    ALGORITHMS as PROGRESSIVE_ALGORITHMS,
    SCHEMES,
    WeightingScheme,
    compute_metrics,
    progressive_interlink,
    write_trace,
)


def _dataset_args(parser: argparse.ArgumentParser, role: str):
    parser.add_argument(f"--{role}", required=True, help=f"{role} dataset path")
    parser.add_argument(f"--{role}-format", choices=["csv-wkt", "tsv-wkt", "geojson"], default=None)
    parser.add_argument(f"--{role}-geometry-column", type=int, default=None)
    parser.add_argument(f"--{role}-delimiter", default=None)
    parser.add_argument(f"--{role}-header", action="store_true")


def _descriptor(args, role: str) -> DatasetDescriptor:
    get = lambda name: getattr(args, f"{role}_{name}")
    return DatasetDescriptor(
        path=getattr(args, role),
        format=get("format"),
        geometry_column=get("geometry_column"),
        delimiter=get("delimiter"),
        has_header=get("header"),
    )


def _config_from(args) -> AlgorithmConfig:
    return AlgorithmConfig(
        tile_width=args.tile_width,
        tile_height=args.tile_height,
        sweep_structure=args.sweep_structure,
        pbsm_nx=args.pbsm_partitions[0],
        pbsm_ny=args.pbsm_partitions[1],
        stripe_storage=args.stripe_storage,
        node_capacity=args.node_capacity,
        quant_bits=args.quant_bits,
        auto_swap=not args.no_swap,
        memory_budget=args.memory_budget,
        threads=args.threads,
    )


def _partitions(text: str) -> tuple[int, int]:
    try:
        nx, ny = text.lower().split("x")
        return int(nx), int(ny)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None


def _algo_config_args(parser):
    parser.add_argument("--tile-width", type=float, default=None)
    parser.add_argument("--tile-height", type=float, default=None)
    parser.add_argument("--sweep-structure", choices=["list", "striped"], default="list")
    parser.add_argument("--pbsm-partitions", type=_partitions, default=(64, 64), metavar="NxM")
    parser.add_argument("--stripe-storage", choices=["map", "str"], default="map")
    parser.add_argument("--node-capacity", type=int, default=16)
    parser.add_argument("--quant-bits", type=int, choices=[4, 8, 16], default=8)
    parser.add_argument("--no-swap", action="store_true", help="never swap source/target")
    parser.add_argument("--memory-budget", type=int, default=None, help="byte cap for memory-intensive algorithms")
    parser.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geolink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interlink", help="batch interlinking")
    _dataset_args(p, "source")
    _dataset_args(p, "target")
    p.add_argument("--algorithm", choices=list(BATCH_ALGORITHMS), default="giant")
    p.add_argument("--tree", choices=["rtree", "quadtree", "crtree"], default=None,
                   help="shorthand for --algorithm with a tree index")
    _algo_config_args(p)
    p.add_argument("--output", default=None, help="write link triples (TSV)")
    p.add_argument("--report", default=None, help="write run report (JSON)")

    p = sub.add_parser("progressive", help="budget-aware interlinking")
    _dataset_args(p, "source")
    _dataset_args(p, "target")
    p.add_argument("--algorithm", choices=list(PROGRESSIVE_ALGORITHMS), default="pg")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--scheme", choices=list(SCHEMES), default="js")
    p.add_argument("--secondary-scheme", choices=list(SCHEMES), default=None)
    p.add_argument("--tile-order", choices=["inc", "dec"], default="inc")
    p.add_argument("--tile-width", type=float, default=None)
    p.add_argument("--tile-height", type=float, default=None)
    p.add_argument("--no-swap", action="store_true")
    p.add_argument("--output", default=None)
    p.add_argument("--trace", default=None, help="write the examination trace (TSV)")
    p.add_argument("--report", default=None)

    p = sub.add_parser("parallel", help="multi-worker interlinking")
    _dataset_args(p, "source")
    _dataset_args(p, "target")
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--macro-grid", type=_partitions, default=(8, 8), metavar="NxM",
                   help="fine tiles per partition, per axis")
    p.add_argument("--mode", choices=["batch", "progressive"], default="batch")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--scheme", choices=list(SCHEMES), default="js")
    p.add_argument("--algorithm", choices=list(PROGRESSIVE_ALGORITHMS), default="pg")
    p.add_argument("--output", default=None)
    p.add_argument("--report", default=None)

    p = sub.add_parser("bench", help="benchmark a set of algorithms")
    _dataset_args(p, "source")
    _dataset_args(p, "target")
    p.add_argument("--algorithms", nargs="+", required=True)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--budgets", nargs="*", type=int, default=None)
    p.add_argument("--scheme", choices=list(SCHEMES), default="js")
    p.add_argument("--compare-kernels", action="store_true",
                   help="also time the compiled vs interpreted relate kernel")
    p.add_argument("--report", default=None)

    p = sub.add_parser("grid-search", help="sweep declared parameter domains")
    _dataset_args(p, "source")
    _dataset_args(p, "target")
    p.add_argument("--algorithm", required=True)
    p.add_argument("--objective", choices=["min_runtime", "max_pgr"], default="min_runtime")
    p.add_argument("--budget", type=int, default=None)

    p = sub.add_parser("synth", help="generate deterministic synthetic datasets")
    p.add_argument("--profile", choices=list(workbench.SYNTH_PROFILES), default="uniform")
    p.add_argument("--source-count", type=int, required=True)
    p.add_argument("--target-count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("report", help="pretty-print a saved report")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("inspect", help="print algorithm documentation")
    p.add_argument("algorithm", nargs="?", default=None)

    return parser


def _cmd_interlink(args) -> int:
    if args.tree:
        args.algorithm = args.tree
    result = interlink(_descriptor(args, "source"), _descriptor(args, "target"),
                       args.algorithm, _config_from(args))
    if args.output:
        write_links(result.linkset.sorted_triples(), args.output)
    if args.report:
        write_report(result.report(), args.report)
    print(f"{args.algorithm}: {len(result.linkset)} triples from "
          f"{result.linkset.verified_pairs} verified pairs "
          f"(t_f={result.timings.filtering_s * 1000:.1f}ms t_v={result.timings.verification_s * 1000:.1f}ms)")
    return 0


def _cmd_progressive(args) -> int:
    scheme = WeightingScheme(args.scheme, args.secondary_scheme)
    result = progressive_interlink(
        _descriptor(args, "source"), _descriptor(args, "target"),
        args.algorithm, scheme, budget=args.budget, tile_order=args.tile_order,
        tile_width=args.tile_width, tile_height=args.tile_height,
        auto_swap=not args.no_swap,
    )
    metrics = compute_metrics(result.trace, result.linkset.related_pairs, args.budget)
    if args.output:
        write_links(result.linkset.sorted_triples(), args.output)
    if args.trace:
        write_trace(result.trace, args.trace)
    if args.report:
        report = {
            "algorithm": args.algorithm,
            "params": {"budget": args.budget, "scheme": args.scheme,
                       "secondary_scheme": args.secondary_scheme},
            "t_f_ms": round(result.timings.filtering_s * 1000, 3),
            "t_v_ms": round(result.timings.verification_s * 1000, 3),
            "verified": result.linkset.verified_pairs,
            "related": result.linkset.related_pairs,
            "per_relation_counts": dict(sorted(result.linkset.per_relation.items())),
            "precision": metrics.precision,
        }
        write_report(report, args.report)
    print(f"{args.algorithm}[{args.scheme}] budget={args.budget}: examined {result.examined}, "
          f"related {result.linkset.related_pairs}, precision {metrics.precision:.3f}")
    return 0


def _cmd_parallel(args) -> int:
    result = parallel_interlink(
        _descriptor(args, "source"), _descriptor(args, "target"),
        workers=args.workers, mode=args.mode, budget=args.budget,
        scheme=WeightingScheme(args.scheme), algorithm=args.algorithm,
        macro=args.macro_grid,
    )
    if args.output:
        write_links(result.linkset.sorted_triples(), args.output)
    if args.report:
        report = {
            "mode": args.mode,
            "workers": args.workers,
            "units": result.unit_count,
            "skew_max_min": list(result.skew),
            "t_f_ms": round(result.timings.filtering_s * 1000, 3),
            "t_v_ms": round(result.timings.verification_s * 1000, 3),
            "verified": result.linkset.verified_pairs,
            "related": result.linkset.related_pairs,
            "per_relation_counts": dict(sorted(result.linkset.per_relation.items())),
        }
        write_report(report, args.report)
    print(f"parallel[{args.mode}] workers={args.workers} units={result.unit_count}: "
          f"{len(result.linkset)} triples, {result.linkset.verified_pairs} verified")
    return 0


def _cmd_bench(args) -> int:
    from .dataio import read_dataset

    source, _ = read_dataset(_descriptor(args, "source"))
    target, _ = read_dataset(_descriptor(args, "target"))
    report = workbench.run_benchmark(
        source, target, args.algorithms, repetitions=args.repetitions,
        budgets=args.budgets, scheme=WeightingScheme(args.scheme),
    )
    doc = report.to_dict()
    if args.compare_kernels:
        doc["kernel_comparison"] = workbench.benchmark_kernels(source, target, args.repetitions)
    print(workbench.format_report_table(doc))
    if args.compare_kernels:
        kc = doc["kernel_comparison"]
        print(f"kernel: compiled {kc['compiled_ms']}ms ({kc['compiled_backend']}) vs "
              f"interpreted {kc['interpreted_ms']}ms; agree={kc['agree']}")
    if args.report:
        write_report(doc, args.report)
    return 0


def _cmd_grid_search(args) -> int:
    from .dataio import read_dataset

    source, _ = read_dataset(_descriptor(args, "source"))
    target, _ = read_dataset(_descriptor(args, "target"))
    result = workbench.grid_search(args.algorithm, source, target, args.objective, args.budget)
    print(json.dumps(result["best"], indent=2, sort_keys=True))
    return 0


def _cmd_synth(args) -> int:
    src, tgt = workbench.synth_generate(
        args.profile, args.source_count, args.target_count, args.seed, args.out_dir
    )
    print(f"wrote {src} and {tgt}")
    return 0


def _cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(workbench.format_report_table(doc))
    return 0


def _cmd_inspect(args) -> int:
    names = [args.algorithm] if args.algorithm else sorted(workbench.ALGORITHM_DOCS)
    for name in names:
        doc = workbench.inspect_algorithm(name)
        print(f"{doc.name}: {doc.summary}")
        for p in doc.parameters:
            domain = f" [{p.minimum}..{p.maximum}]" if p.minimum is not None else ""
            if p.choices:
                domain = f" {{{', '.join(map(str, p.choices))}}}"
            print(f"  {p.name} (default {p.default}{domain}): {p.description}")
    return 0


_COMMANDS = {
    "interlink": _cmd_interlink,
    "progressive": _cmd_progressive,
    "parallel": _cmd_parallel,
    "bench": _cmd_bench,
    "grid-search": _cmd_grid_search,
    "synth": _cmd_synth,
    "report": _cmd_report,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except GeolinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
