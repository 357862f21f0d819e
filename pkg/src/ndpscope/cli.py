"""Command-line front end: gen, analyze, cluster, noc, hotblocks.

Exit codes: 0 success, 1 runtime error (an ``error.json`` lands in the output
directory and the same JSON goes to stderr), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__, plotting
from .archetypes import RECIPES, SCALES, gen_archetype
from .cachesim import ConfigInvalid, preset, simulate
from .cluster import HIER_FEATURES, KMEANS_FEATURES, FeatureVector, hierarchical, kmeans, standardize
from .config import FORMATS, RunConfig, build_hierarchy, load_file, resolve
from .generators import gen_cyclic, gen_pointer_chase, gen_random, gen_sequential, gen_single_address
from .ndp_analysis import hop_histogram, hot_blocks, noc_overhead
from .pipeline import METRIC_COLUMNS, analyze_function, load_inputs
from .report import read_csv, write_csv, write_json
from .trace import EmptyTrace, load, save

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
ARCHETYPES = [c.value for c in RECIPES]
KINDS = ("sequential", "random", "cyclic", "chase", "single")

_SIZE = re.compile(r"^\s*(\d+)\s*([KMG]i?B?|B)?\s*$", re.I)


def parse_size(text: str) -> int:
    """``4096``, ``128KiB``, ``64MiB`` or ``1GiB`` to bytes (powers of 1024)."""
    m = _SIZE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad size {text!r}")
    mult = {"": 1, "B": 1, "K": 1 << 10, "M": 1 << 20, "G": 1 << 30}[(m.group(2) or "")[:1].upper()]
    return int(m.group(1)) * mult


def parse_cores(text: str) -> list[int]:
    try:
        cores = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad core list {text!r}") from None
    if not cores or cores[0] < 1:
        raise argparse.ArgumentTypeError("core counts must be positive integers")
    return cores


def parse_home(text: str) -> list[int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"home must look like 'x,y', got {text!r}") from None
    if x < 0 or y < 0:
        raise argparse.ArgumentTypeError("home coordinates must be non-negative")
    return [x, y]


def parse_formats(text: str) -> list[str]:
    if text in ("both", "all"):
        return list(FORMATS)
    vals = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in vals if v not in FORMATS]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"format must be json, csv or both, got {text!r}")
    return [f for f in FORMATS if f in vals]


def parse_scale(text: str):
    if text in SCALES:
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"scale must be one of {sorted(SCALES)} or a number") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("scale must be positive")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration file")
    common.add_argument("--jobs", type=_positive, default=argparse.SUPPRESS, help="parallel simulations")
    common.add_argument("--seed", type=_nonneg, default=argparse.SUPPRESS)
    common.add_argument("-o", "--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--format", type=parse_formats, default=argparse.SUPPRESS, dest="formats",
                        help="json, csv or both (default both)")
    common.add_argument("--plots", action="store_true", default=argparse.SUPPRESS,
                        help="also render PNG figures")

    p = argparse.ArgumentParser(prog="ndpscope", parents=[common],
                                description="Memory-bottleneck characterization for near-data processing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write synthetic DMV1 traces")
    which = g.add_mutually_exclusive_group(required=True)
    which.add_argument("--archetype", choices=ARCHETYPES + ["all"])
    which.add_argument("--kind", choices=KINDS)
    g.add_argument("--cores", type=parse_cores, help="comma-separated core counts")
    g.add_argument("--scale", type=parse_scale)
    g.add_argument("--records", type=_positive, default=4096, help="records for --kind traces")
    g.add_argument("--footprint", type=parse_size, default=parse_size("64KiB"))
    g.add_argument("--stride", type=_positive, default=1, help="stride in words for --kind sequential")
    g.add_argument("--base", type=lambda s: int(s, 0), default=0, help="base address")
    g.add_argument("--alu-ops", type=_nonneg, default=1)
    g.add_argument("--instr-gap", type=_nonneg, default=1)

    a = sub.add_parser("analyze", parents=[common], help="characterize traces or manifests")
    a.add_argument("inputs", nargs="+", help="manifest.json or .dmv trace files")
    a.add_argument("--cores", type=parse_cores)
    a.add_argument("--presets", type=lambda s: [x.strip() for x in s.split(",") if x.strip()])

    c = sub.add_parser("cluster", parents=[common], help="cluster functions from metrics.csv")
    c.add_argument("metrics", help="metrics.csv written by analyze")
    c.add_argument("--kind", choices=("kmeans", "hierarchical"), default="hierarchical")
    c.add_argument("--k", type=_positive)
    c.add_argument("--linkage", choices=("average", "single", "complete"))

    n = sub.add_parser("noc", parents=[common], help="NoC hop distribution for one trace")
    n.add_argument("trace")
    n.add_argument("--home", type=parse_home)
    n.add_argument("--round-trip", action="store_true", default=None)

    h = sub.add_parser("hotblocks", parents=[common], help="rank basic blocks by LLC misses")
    h.add_argument("trace")
    h.add_argument("--preset", default="host", choices=("host", "hostpf", "ndp"))
    return p


def _flags(args) -> dict:
    g = lambda name: getattr(args, name, None)  # noqa: E731
    flags = {
        "seed": g("seed"),
        "jobs": g("jobs"),
        "formats": g("formats"),
        "plots": g("plots"),
        "cores": g("cores"),
        "scale": g("scale"),
        "presets": g("presets"),
        "home": g("home"),
        "round_trip": g("round_trip"),
    }
    clus = {k: v for k, v in (("k", g("k")), ("linkage", g("linkage"))) if v is not None}
    if clus:
        flags["cluster"] = clus
    return flags


# subcommands ---------------------------------------------------------------


def cmd_gen(args, cfg: RunConfig, out: Path) -> None:
    functions = []
    if args.archetype:
        labels = ARCHETYPES if args.archetype == "all" else [args.archetype]
        for label in labels:
            sets = gen_archetype(label, cfg.scale, cfg.seed, cfg.cores, cfg.word_size)
            entry = {"name": label, "func_id": ARCHETYPES.index(label), "bundles": {}}
            for cores, bundle in sets.items():
                d = out / label / f"c{cores}"
                d.mkdir(parents=True, exist_ok=True)
                files = []
                for s, t in enumerate(bundle):
                    rel = f"{label}/c{cores}/s{s:04d}.dmv"
                    save(t, out / rel)
                    files.append(rel)
                entry["bundles"][str(cores)] = files
            functions.append(entry)
        gen_info = {"archetype": args.archetype, "scale": cfg.scale, "cores": cfg.cores}
    else:
        fields = {"alu_ops": args.alu_ops, "instr_gap": args.instr_gap}
        n, ws = args.records, cfg.word_size
        if args.kind == "sequential":
            t = gen_sequential(n, args.base, args.stride, ws, **fields)
        elif args.kind == "random":
            t = gen_random(n, args.footprint, ws, cfg.seed, args.base, **fields)
        elif args.kind == "cyclic":
            t = gen_cyclic(args.footprint, n, ws, args.base, **fields)
        elif args.kind == "chase":
            t = gen_pointer_chase(args.footprint, n, ws, cfg.seed, args.base, **fields)
        else:
            t = gen_single_address(n, args.base, ws, **fields)
        rel = f"{args.kind}.dmv"
        save(t, out / rel)
        functions.append({"name": args.kind, "func_id": 0, "bundles": {"1": [rel]}})
        gen_info = {"kind": args.kind, "records": n, "footprint": args.footprint, "stride": args.stride,
                    "base": args.base, **fields}
    manifest = {"format": "DMV1", "seed": cfg.seed, "word_size": cfg.word_size,
                "generator": gen_info, "functions": functions}
    write_json(out / "manifest.json", manifest)


def cmd_analyze(args, cfg: RunConfig, out: Path) -> None:
    reports = [analyze_function(name, b, cfg, fid) for name, fid, b in load_inputs(args.inputs, cfg)]
    if "json" in cfg.formats:
        write_json(out / "report.json", {"functions": [r.to_dict() for r in reports]})
    if "csv" in cfg.formats:
        write_csv(out / "metrics.csv", [r.metrics_row() for r in reports], METRIC_COLUMNS)
        scal_cols = ("function",) + tuple(reports[0].points[0].CSV_COLUMNS)
        rows = [{"function": r.name, **p.to_row()} for r in reports for p in r.points]
        write_csv(out / "scalability.csv", rows, scal_cols)
        e_cols = ("function", "preset", "core_count", "l1_pj", "l2_pj", "l3_pj", "dram_pj", "link_pj", "total_pj")
        write_csv(out / "energy.csv", rows, e_cols)
        sp = [{"function": r.name, **row} for r in reports if r.speedup for row in r.speedup.rows()]
        write_csv(out / "speedup.csv", sp, ("function", "core_count", "speedup", "energy_ratio"))
        roof = [
            {"function": r.name, "preset": p.preset, "core_count": p.core_count, "ai": p.metrics.ai,
             "mpki": p.metrics.mpki, "throughput_ipc": p.throughput_ipc, "rel_throughput": p.rel_throughput}
            for r in reports for p in r.points
        ]
        write_csv(out / "roofline.csv", roof,
                  ("function", "preset", "core_count", "ai", "mpki", "throughput_ipc", "rel_throughput"))
    if cfg.plots:
        plotting.scalability(reports, out / "scalability.png")
        plotting.energy(reports, out / "energy.png")
        plotting.speedup(reports, out / "speedup.png")
        plotting.roofline(reports, out / "roofline.png")


def _vectors(rows: list[dict], features) -> list[FeatureVector]:
    vecs = []
    for row in rows:
        try:
            vecs.append(FeatureVector(row["function"], tuple(float(row[f]) for f in features)))
        except (KeyError, ValueError) as e:
            raise ValueError(f"metrics row {row.get('function', '?')}: missing or bad value ({e})") from None
    return vecs


def cmd_cluster(args, cfg: RunConfig, out: Path) -> None:
    rows = read_csv(args.metrics)
    cc = cfg.cluster
    if args.kind == "kmeans":
        raw = _vectors(rows, KMEANS_FEATURES)
        vecs = standardize(raw) if cc["standardize"] else raw
        res = kmeans(vecs, cc["k"], cfg.seed, cc["max_iter"], cc["tol"], cc["init"], cc["n_init"])
        doc = res.to_dict()
        doc.update({"k": cc["k"], "seed": cfg.seed, "features": list(KMEANS_FEATURES),
                    "standardized": cc["standardize"], "groups": res.groups()})
        write_json(out / "kmeans.json", doc)
        if cfg.plots:
            plotting.kmeans_scatter([v.name for v in raw], [v.features for v in raw], res.assignments,
                                    out / "kmeans.png")
    else:
        raw = _vectors(rows, HIER_FEATURES)
        vecs = standardize(raw) if cc["standardize"] else raw
        dend = hierarchical(vecs, cc["linkage"])
        doc = dend.to_dict()
        doc.update({"features": list(HIER_FEATURES), "standardized": cc["standardize"],
                    "monotone": dend.is_monotone()})
        write_json(out / "dendrogram.json", doc)
        (out / "dendrogram.newick").write_text(dend.to_newick() + "\n")
        if cfg.plots:
            plotting.dendrogram(dend, out / "dendrogram.png")


def cmd_noc(args, cfg: RunConfig, out: Path) -> None:
    mesh = cfg.mesh_obj()
    trace = load(args.trace)
    hist = hop_histogram(trace, mesh, tuple(cfg.home))
    doc = hist.to_dict()
    doc.update({
        "home": list(cfg.home),
        "mesh": mesh.to_dict(),
        "round_trip": cfg.round_trip,
        "overhead_cycles": noc_overhead(hist, mesh, cfg.round_trip),
    })
    if "json" in cfg.formats:
        write_json(out / "hops.json", doc)
    if "csv" in cfg.formats:
        write_csv(out / "hops.csv", [{"hops": h, "fraction": f} for h, f in sorted(hist.bins.items())],
                  ("hops", "fraction"))
    if cfg.plots:
        plotting.hops(hist, out / "hops.png")


def cmd_hotblocks(args, cfg: RunConfig, out: Path) -> None:
    trace = load(args.trace)
    if len(trace) == 0:
        raise EmptyTrace(f"{Path(args.trace).name}: trace has no records")
    hier = build_hierarchy(preset(args.preset).preset_name.value, cfg.hierarchy.get(args.preset, {}))
    stats = simulate(trace, hier)
    rep = hot_blocks(stats)
    if "json" in cfg.formats:
        write_json(out / "blocks.json", {
            "preset": args.preset,
            "total_misses": rep.total_misses,
            "hottest": rep.hottest,
            "blocks": rep.rows(),
        })
    if "csv" in cfg.formats:
        write_csv(out / "blocks.csv", rep.rows(), ("bb_id", "llc_misses", "fraction", "cumulative"))
    if cfg.plots:
        plotting.blocks(rep, out / "blocks.png")


COMMANDS = {
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "cluster": cmd_cluster,
    "noc": cmd_noc,
    "hotblocks": cmd_hotblocks,
}


def _error_doc(exc: BaseException, command: str) -> dict:
    code = getattr(exc, "code", None)
    if not isinstance(code, str):
        code = type(exc).__name__
    return {"error": code, "message": str(exc), "command": command}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_data = load_file(args.config) if getattr(args, "config", None) else None
        cfg = resolve(file_data, _flags(args))
    except (ConfigInvalid, OSError) as e:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(getattr(args, "out", None) or "ndpscope-out")
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, cfg, out)
        write_json(out / "effective_config.json", cfg.to_dict())
    except Exception as e:  # every runtime failure maps to exit 1
        doc = _error_doc(e, args.command)
        print(json.dumps(doc, sort_keys=True), file=sys.stderr)
        try:
            write_json(out / "error.json", doc)
        except OSError:
            pass
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
