"""Command-line entry point (``graphprivacy`` / ``python -m graphprivacy``).

Exit status: 0 on success, 2 for configuration or usage errors, 3 for data
errors (unreadable or malformed inputs, empty stores).

Estimate dumps use the internal dense node ids of the loaded graphs, i.e.
first-appearance order in the respective edge-list files. A sidecar
``<out>.meta.json`` stores the graph sizes the metrics need.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .anonymizers import AnonymizerConfig, anonymize
from .deanonymizers import DeanonConfig, deanonymize, make_knowledge
from .estimate import AdversaryEstimate
from .graph import (
    EdgeListError,
    GraphStats,
    NodeMapping,
    compute_graph_stats,
    largest_connected_component,
    load_edge_list,
    write_edge_list,
    write_stats_csv,
)
from .harness import (
    ConfigError,
    DataError,
    ExperimentConfig,
    ResultStore,
    _collect,
    build_reports,
    scenario_matrices,
    run_experiment,
)
from .metrics import METRIC_NAMES, MetricParams, evaluate_all
from .suites import PRESETS, SuiteSpec, search_suites, suite_monotonic_fraction

EXIT_CONFIG = 2
EXIT_DATA = 3

# short names accepted by ``anonymize --param``
PARAM_ALIASES = {"r": "switch_fraction", "eps": "epsilon", "t": "walk_distance", "max_size": "tmeans_max_size"}


def _params(pairs: list[str]) -> dict:
    fields = {f.name: f for f in dataclasses.fields(AnonymizerConfig)}
    out = {}
    for item in pairs:
        key, sep, val = item.partition("=")
        key = PARAM_ALIASES.get(key, key)
        if not sep or key not in fields or key in ("kind", "seed"):
            raise ConfigError(f"bad --param {item!r}; known: {sorted(set(fields) - {'kind', 'seed'})}")
        try:
            out[key] = int(val) if fields[key].type in (int, "int") else float(val)
        except ValueError as exc:
            raise ConfigError(f"bad value in --param {item!r}") from exc
    return out


def cmd_stats(args) -> int:
    rows = {}
    for path in args.edges:
        g = load_edge_list(path)
        if args.lcc:
            g = largest_connected_component(g)
        st = compute_graph_stats(g, path_sample=args.path_sample, seed=args.seed)
        rows[Path(path).name.split(".")[0]] = st
    if args.out:
        write_stats_csv(rows, args.out)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["Dataset", *GraphStats.CSV_COLUMNS])
        for name, st in rows.items():
            w.writerow([name, *st.as_row()])
    return 0


def cmd_anonymize(args) -> int:
    cfg = AnonymizerConfig(kind=args.algo, seed=args.seed, **_params(args.param))
    g = load_edge_list(args.input)
    anon, mapping = anonymize(g, cfg)
    write_edge_list(anon, args.output)
    with open(args.map, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["original_id", "anonymized_id"])
        for a, b in mapping.pairs:
            w.writerow([g.labels[a], anon.labels[b]])
    return 0


def _read_mapping(path, g_orig, g_anon) -> NodeMapping:
    orig_ids = {lab: i for i, lab in enumerate(g_orig.labels)}
    anon_ids = {lab: i for i, lab in enumerate(g_anon.labels)}
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"original_id", "anonymized_id"} - set(reader.fieldnames):
            raise DataError(f"{path}: expected columns original_id, anonymized_id")
        for row in reader:
            a, b = orig_ids.get(row["original_id"]), anon_ids.get(row["anonymized_id"])
            if a is not None and b is not None:  # isolated nodes never reach an edge list
                pairs.append((a, b))
    return NodeMapping(tuple(pairs))


def cmd_deanonymize(args) -> int:
    cfg = DeanonConfig(kind=args.algo, theta=args.theta, chunk_size=args.chunk, seed=args.seed)
    g_orig = load_edge_list(args.original)
    g_anon = load_edge_list(args.anonymized)
    mapping = _read_mapping(args.map, g_orig, g_anon)
    k = make_knowledge(g_orig, (g_anon, mapping), args.aux_ratio, args.seeds, np.random.SeedSequence(args.seed))
    est = deanonymize(k, cfg)
    est.to_jsonl(args.output)
    meta = {"total_nodes": est.total_nodes, "aux_nodes": est.aux_nodes, "chunk_size_used": est.chunk_size_used}
    Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_metrics(args) -> int:
    meta_path = Path(args.meta or str(args.estimate) + ".meta.json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read estimate metadata {meta_path}: {exc}") from exc
    est = AdversaryEstimate.from_jsonl(args.estimate, **meta)
    res = evaluate_all(est, MetricParams())
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "level", "value"])
        for m in METRIC_NAMES:
            w.writerow([m, res[m].descriptor.level, repr(float(res[m].per_graph))])
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {k: v for k, v in (("workers", args.workers), ("output_dir", args.output)) if v is not None}
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    store = run_experiment(cfg, progress=True)
    if args.report:
        build_reports(store)
    print(store.path)
    return 0


def _store(path) -> ResultStore:
    store = ResultStore(path)
    if not store.records_path.exists():
        raise DataError(f"{path} is not a result store (records.csv missing)")
    return store


def cmd_report(args) -> int:
    summary = build_reports(_store(args.store), args.out)
    print(json.dumps({"top_monotonic": summary["top_monotonic"], "presets": summary["presets"]}, indent=2))
    return 0


def cmd_suite(args) -> int:
    data, _, _ = _collect(_store(args.store))
    if not data:
        raise DataError("result store is empty")
    matrices = scenario_matrices(data)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["suite", "pct_monotonic", "pair_fraction"])
    if args.search:
        for suite, frac, pct in search_suites(args.search.split(","), matrices)[: args.limit]:
            w.writerow([suite.label(), pct, frac])
        return 0
    if args.preset:
        suite = PRESETS[args.preset]
    elif args.metrics:
        names = args.metrics.split(",")
        if args.weights:
            weights = [float(x) for x in args.weights.split(",")]
            if len(weights) != len(names):
                raise ConfigError("--weights needs one value per metric")
            suite = SuiteSpec(tuple(zip(names, weights)))
        else:
            suite = SuiteSpec.equal(names)
    else:
        raise ConfigError("give --preset, --metrics or --search")
    frac, pct = suite_monotonic_fraction(matrices, suite)
    w.writerow([suite.label(), pct, frac])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphprivacy", description="Graph anonymization privacy-metric toolkit")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="structural statistics of edge-list graphs")
    s.add_argument("edges", nargs="+")
    s.add_argument("--lcc", action="store_true", help="restrict to the largest connected component")
    s.add_argument("--path-sample", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("anonymize", help="anonymize an edge list")
    s.add_argument("--algo", required=True, choices=["idrem", "switch", "kda", "dp", "rw", "tmeans"])
    s.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("map")
    s.set_defaults(func=cmd_anonymize)

    s = sub.add_parser("deanonymize", help="attack an anonymized graph, dump the estimate as JSONL")
    s.add_argument("--algo", required=True, choices=["ns", "kl", "yg", "dv", "jlsb", "ada"])
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--aux-ratio", type=float, default=0.85)
    s.add_argument("--chunk", type=int, default=100)
    s.add_argument("--theta", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("original")
    s.add_argument("anonymized")
    s.add_argument("map")
    s.add_argument("output")
    s.set_defaults(func=cmd_deanonymize)

    s = sub.add_parser("metrics", help="evaluate all 26 metrics on an estimate dump")
    s.add_argument("estimate")
    s.add_argument("--meta")
    s.add_argument("--out")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("run", help="run an experiment from a JSON config")
    s.add_argument("config")
    s.add_argument("--workers", type=int)
    s.add_argument("--output")
    s.add_argument("--report", action="store_true", help="build reports afterwards")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("report", help="build report files from a result store")
    s.add_argument("store")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("suite", help="score a metric suite on a result store")
    s.add_argument("store")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--metrics", help="comma-separated metric names")
    g.add_argument("--search", help="comma-separated candidates; scores every subset")
    s.add_argument("--weights", help="comma-separated weights matching --metrics")
    s.add_argument("--limit", type=int, default=10)
    s.set_defaults(func=cmd_suite)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (DataError, EdgeListError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
