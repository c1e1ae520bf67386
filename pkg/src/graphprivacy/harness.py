"""Experiment orchestration: scenario grid, replication control, persistence, reports.

A *scenario* is (dataset, anonymizer, de-anonymizer, strength type); each
scenario runs every level of its strength schedule. Replications of a
scenario level run in batches until every tracked per-graph metric has a
confidence-interval half-width within ``relative_error * max(|mean|, 0.01)``
(bounded by the min/max replication counts).

Store layout (all text, byte-stable for a fixed config and master seed)::

    manifest.json   config, config hash, library version
    records.csv     scenario_id,dataset,anonymizer,deanonymizer,strength_type,
                    level_index,strength_level,replication,metric,level,value
    pernode.csv     scenario_id,level_index,replication,metric,anon_id,value
    skipped.csv     scenario_id,level_index,replication,reason
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import signal
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .anonymizers import AnonymizerConfig, anonymize
from .deanonymizers import DeanonConfig, deanonymize, make_knowledge
from .graph import Graph, largest_connected_component, load_edge_list
from .metrics import METRIC_NAMES, REGISTRY, MetricParams, evaluate_all
from .stats import mean_ci
from .strength import ScenarioSeries, evenness_score, monotonicity_score, shared_range_score
from .suites import PRESETS, AlternativeMatrix, SuiteSpec, search_suites, suite_monotonic_fraction

__all__ = [
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "Replication",
    "ResultStore",
    "run_experiment",
    "build_reports",
    "scenario_grid",
    "WORKERS_ENV",
]

log = logging.getLogger(__name__)

WORKERS_ENV = "GRAPHPRIVACY_WORKERS"
STRENGTH_TYPES = ("seeds", "aux_ratio")
RECORD_COLUMNS = (
    "scenario_id", "dataset", "anonymizer", "deanonymizer", "strength_type",
    "level_index", "strength_level", "replication", "metric", "level", "value",
)


class ConfigError(ValueError):
    pass


class DataError(RuntimeError):
    pass


@dataclass(frozen=True)
class Replication:
    min: int = 100
    max: int = 1000
    relative_error: float = 0.05
    confidence: float = 0.95
    batch: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...]
    anonymizers: tuple[AnonymizerConfig, ...] = (AnonymizerConfig("IDremoval"),)
    deanonymizers: tuple[DeanonConfig, ...] = (DeanonConfig("NS"),)
    seed_schedule: tuple[int, ...] = (5, 10, 20, 35, 50, 100)
    aux_schedule: tuple[float, ...] = (0.6, 0.7, 0.8, 0.85, 0.9, 0.95)
    default_seeds: int = 50
    default_aux_ratio: float = 0.85
    strength_types: tuple[str, ...] = STRENGTH_TYPES
    replication: Replication = Replication()
    master_seed: int = 0
    output_dir: str = "results"
    workers: int | None = None
    per_node_replications: int = 0
    timeout: float | None = None
    metric_params: MetricParams = MetricParams()

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("at least one dataset is required")
        for name, sched in (("seed_schedule", self.seed_schedule), ("aux_schedule", self.aux_schedule)):
            if len(sched) < 2 or any(b <= a for a, b in zip(sched, sched[1:])):
                raise ConfigError(f"{name} must be strictly increasing with >= 2 levels")
        if min(self.seed_schedule) < 1:
            raise ConfigError("seed counts must be >= 1")
        if not all(0 < r <= 1 for r in self.aux_schedule) or not 0 < self.default_aux_ratio <= 1:
            raise ConfigError("aux ratios must lie in (0, 1]")
        if not set(self.strength_types) <= set(STRENGTH_TYPES) or not self.strength_types:
            raise ConfigError(f"strength_types must be a subset of {STRENGTH_TYPES}")
        rep = self.replication
        if not 0 < rep.relative_error < 1:
            raise ConfigError("relative_error must lie in (0, 1)")
        if not 0 < rep.confidence < 1:
            raise ConfigError("confidence must lie in (0, 1)")
        if rep.min < 2 or rep.max < rep.min or rep.batch < 1:
            raise ConfigError("need 2 <= min <= max replications and batch >= 1")

    # ---- (de)serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for dc in d["deanonymizers"]:
            dc.pop("extra", None)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        try:
            if "datasets" not in d:
                raise ConfigError("config needs 'datasets'")
            d["datasets"] = tuple(str(p) for p in d["datasets"])
            d["anonymizers"] = tuple(AnonymizerConfig(**a) for a in d.get("anonymizers", [{"kind": "IDremoval"}]))
            d["deanonymizers"] = tuple(
                DeanonConfig(**{k: tuple(v) if k.endswith("_weights") else v for k, v in x.items()})
                for x in d.get("deanonymizers", [{"kind": "NS"}])
            )
            for key in ("seed_schedule", "aux_schedule", "strength_types"):
                if key in d:
                    d[key] = tuple(d[key])
            if "replication" in d:
                d["replication"] = Replication(**d["replication"])
            if "metric_params" in d:
                mp = dict(d["metric_params"])
                if "quantile_cutoffs" in mp:
                    mp["quantile_cutoffs"] = tuple(mp["quantile_cutoffs"])
                d["metric_params"] = MetricParams(**mp)
            return cls(**d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def config_hash(self) -> str:
        """Hash of everything that affects results (output location and worker count excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def schedule(self, strength_type: str) -> tuple:
        return self.seed_schedule if strength_type == "seeds" else self.aux_schedule


@dataclass(frozen=True)
class Scenario:
    dataset_index: int
    dataset: str
    anonymizer_index: int
    anonymizer: AnonymizerConfig
    deanonymizer_index: int
    deanonymizer: DeanonConfig
    strength_type: str

    @property
    def scenario_id(self) -> str:
        return f"{self.dataset}|{self.anonymizer.label}|{self.deanonymizer.label}|{self.strength_type}"

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.dataset_index, self.anonymizer_index, self.deanonymizer_index,
                STRENGTH_TYPES.index(self.strength_type))


def dataset_name(path: str) -> str:
    return Path(path).name.split(".")[0]


def scenario_grid(cfg: ExperimentConfig) -> list[Scenario]:
    """Every dataset x anonymizer x de-anonymizer x strength type."""
    return [
        Scenario(di, dataset_name(ds), ai, a, ki, d, st)
        for di, ds in enumerate(cfg.datasets)
        for ai, a in enumerate(cfg.anonymizers)
        for ki, d in enumerate(cfg.deanonymizers)
        for st in cfg.strength_types
    ]


# ---------------------------------------------------------------------------- replication


@contextmanager
def _time_limit(seconds: float | None):
    if not seconds or not hasattr(signal, "setitimer"):
        yield
        return

    def _raise(signum, frame):
        raise TimeoutError(f"replication exceeded {seconds}s")

    old = signal.signal(signal.SIGALRM, _raise)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


_GRAPHS: dict[int, Graph] = {}


def _init_worker(graphs: dict[int, Graph]) -> None:
    _GRAPHS.clear()
    _GRAPHS.update(graphs)


def run_replication(g: Graph, sc: Scenario, level, cfg: ExperimentConfig, ss: np.random.SeedSequence,
                    want_nodes: bool):
    """One anonymize -> sample knowledge -> attack -> metrics pass."""
    anon_ss, know_ss, attack_ss = ss.spawn(3)
    n_seeds = level if sc.strength_type == "seeds" else cfg.default_seeds
    ratio = level if sc.strength_type == "aux_ratio" else cfg.default_aux_ratio
    an = anonymize(g, sc.anonymizer, seed=anon_ss)
    k = make_knowledge(g, an, ratio, n_seeds, know_ss)
    dcfg = dataclasses.replace(sc.deanonymizer, seed=int(attack_ss.generate_state(1)[0]))
    est = deanonymize(k, dcfg)
    res = evaluate_all(est, cfg.metric_params)
    values = {m: res[m].per_graph for m in METRIC_NAMES}
    nodes = None
    if want_nodes:
        nodes = {m: (est.anon_ids.tolist(), res[m].per_node.tolist())
                 for m in METRIC_NAMES if res[m].per_node is not None}
    return values, nodes


def _task(args):
    sc, level, cfg, ss, want_nodes = args
    g = _GRAPHS[sc.dataset_index]
    try:
        with _time_limit(cfg.timeout):
            return "ok", run_replication(g, sc, level, cfg, ss, want_nodes)
    except TimeoutError as exc:
        return "skipped", str(exc)
    except ValueError as exc:
        return "skipped", f"{type(exc).__name__}: {exc}"


def _replication_seed(cfg: ExperimentConfig, sc: Scenario, level_index: int, rep: int):
    return np.random.SeedSequence(cfg.master_seed, spawn_key=(*sc.key, level_index, rep))


def _stable(samples: dict[str, list[float]], rep: Replication) -> bool:
    for vals in samples.values():
        if len(vals) < 2:
            return False
        mean, hw = mean_ci(vals, rep.confidence)
        if hw > rep.relative_error * max(abs(mean), 0.01):
            return False
    return True


def _fmt(x: float) -> str:
    return repr(float(x))


class ResultStore:
    """Append-only experiment records backed by a directory of CSV files."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    @property
    def records_path(self) -> Path:
        return self.path / "records.csv"

    @property
    def pernode_path(self) -> Path:
        return self.path / "pernode.csv"

    def manifest(self) -> dict:
        with open(self.path / "manifest.json", encoding="utf-8") as fh:
            return json.load(fh)

    def config(self) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.manifest()["config"])

    def read_records(self) -> list[dict]:
        with open(self.records_path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    def read_pernode(self) -> list[dict]:
        if not self.pernode_path.exists():
            return []
        with open(self.pernode_path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    def rewrite(self, dest: str | Path) -> ResultStore:
        """Copy through a parse/serialize round trip (used to check stability)."""
        dest = Path(dest)
        dest.mkdir(parents=True, exist_ok=True)
        (dest / "manifest.json").write_text(
            json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        for name in ("records.csv", "pernode.csv", "skipped.csv"):
            src = self.path / name
            if not src.exists():
                continue
            with open(src, newline="", encoding="utf-8") as fh:
                rows = list(csv.reader(fh))
            with open(dest / name, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
        return ResultStore(dest)


def _load_datasets(cfg: ExperimentConfig) -> dict[int, Graph]:
    graphs = {}
    for i, path in enumerate(cfg.datasets):
        try:
            graphs[i] = largest_connected_component(load_edge_list(path))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot load dataset {path}: {exc}") from exc
    return graphs


def run_experiment(cfg: ExperimentConfig, progress: bool = False) -> ResultStore:
    """Run the whole scenario grid and persist every per-graph metric value."""
    graphs = _load_datasets(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = cfg.workers or int(os.environ.get(WORKERS_ENV, "1"))
    rep = cfg.replication

    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "library_version": __version__,
        "datasets": {dataset_name(p): {"nodes": graphs[i].node_count, "edges": graphs[i].edge_count}
                     for i, p in enumerate(cfg.datasets)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(graphs,)) if workers > 1 else None
    if pool is None:
        _init_worker(graphs)
    run = pool.map if pool else map

    rec_fh = open(out / "records.csv", "w", newline="", encoding="utf-8")
    node_fh = open(out / "pernode.csv", "w", newline="", encoding="utf-8")
    skip_fh = open(out / "skipped.csv", "w", newline="", encoding="utf-8")
    rec_w = csv.writer(rec_fh, lineterminator="\n")
    node_w = csv.writer(node_fh, lineterminator="\n")
    skip_w = csv.writer(skip_fh, lineterminator="\n")
    rec_w.writerow(RECORD_COLUMNS)
    node_w.writerow(["scenario_id", "level_index", "replication", "metric", "anon_id", "value"])
    skip_w.writerow(["scenario_id", "level_index", "replication", "reason"])
    try:
        for sc in scenario_grid(cfg):
            for li, level in enumerate(cfg.schedule(sc.strength_type)):
                samples: dict[str, list[float]] = {m: [] for m in METRIC_NAMES}
                done = attempts = 0
                while done < rep.max:
                    want = rep.min - done if done < rep.min else min(rep.batch, rep.max - done)
                    idx = range(attempts, attempts + want)
                    attempts += want
                    tasks = [(sc, level, cfg, _replication_seed(cfg, sc, li, r),
                              r < cfg.per_node_replications) for r in idx]
                    for r, (status, payload) in zip(idx, run(_task, tasks)):
                        if status != "ok":
                            skip_w.writerow([sc.scenario_id, li, r, payload])
                            continue
                        values, nodes = payload
                        for m in METRIC_NAMES:
                            samples[m].append(values[m])
                            rec_w.writerow([sc.scenario_id, sc.dataset, sc.anonymizer.label,
                                            sc.deanonymizer.label, sc.strength_type, li, level, r, m,
                                            REGISTRY[m].level, _fmt(values[m])])
                        if nodes:
                            for m, (ids, vals) in nodes.items():
                                for v, x in zip(ids, vals):
                                    node_w.writerow([sc.scenario_id, li, r, m, v, _fmt(x)])
                        done += 1
                    if attempts >= 10 * rep.max:
                        log.warning("%s level %d: too many skipped replications", sc.scenario_id, li)
                        break
                    if done >= rep.min and _stable(samples, rep):
                        break
                if progress:
                    log.info("%s level %s: %d replications", sc.scenario_id, level, done)
    finally:
        rec_fh.close()
        node_fh.close()
        skip_fh.close()
        if pool:
            pool.shutdown()
    return ResultStore(out)


# ---------------------------------------------------------------------------- reports


def _collect(store: ResultStore):
    """scenario -> metric -> level_index -> list of per-graph values (replication order)."""
    data: dict[str, dict[str, dict[int, list[float]]]] = {}
    meta: dict[str, tuple[str, str, str, str]] = {}
    for row in store.read_records():
        sid = row["scenario_id"]
        meta[sid] = (row["dataset"], row["anonymizer"], row["deanonymizer"], row["strength_type"])
        data.setdefault(sid, {}).setdefault(row["metric"], {}).setdefault(int(row["level_index"]), []).append(
            float(row["value"]))
    nodes: dict[str, dict[str, list[float]]] = {}
    for row in store.read_pernode():
        nodes.setdefault(row["scenario_id"], {}).setdefault(row["metric"], []).append(float(row["value"]))
    return data, meta, nodes


def scenario_matrices(data) -> list[AlternativeMatrix]:
    """One alternatives x metrics matrix of level means per scenario."""
    out = []
    for sid in sorted(data):
        per_metric = data[sid]
        levels = sorted(next(iter(per_metric.values())))
        x = np.array([[np.mean(per_metric[m][li]) for m in METRIC_NAMES] for li in levels])
        out.append(AlternativeMatrix(tuple(levels), METRIC_NAMES, x))
    return out


def strength_table(data, meta, nodes, alpha: float = 0.05) -> list[dict]:
    rows = []
    pooled_ranges: dict[str, dict[str, tuple[float, float]]] = {m: {} for m in METRIC_NAMES}
    for sid in sorted(data):
        for m in METRIC_NAMES:
            levels = data[sid][m]
            ordered = [np.asarray(levels[li]) for li in sorted(levels)]
            try:
                mono = monotonicity_score(ScenarioSeries((sid,), REGISTRY[m], tuple(ordered)), alpha)
            except ValueError:
                mono = float("nan")
            pooled = np.asarray(nodes.get(sid, {}).get(m) or np.concatenate(ordered))
            even = evenness_score(pooled) if len(pooled) >= 2 else 0.0
            pooled_ranges[m][sid] = (float(pooled.min()), float(pooled.max()))
            ds, an, de, st = meta[sid]
            rows.append({"metric": m, "scenario_id": sid, "dataset": ds, "anonymizer": an,
                         "deanonymizer": de, "strength_type": st, "monotonicity": mono,
                         "evenness": even})
    shared = {m: shared_range_score(pooled_ranges[m]) for m in METRIC_NAMES}
    for r in rows:
        r["shared_range"] = shared[r["metric"]][r["scenario_id"]]
    return rows


def top_monotonic(strength_rows, k: int = 7) -> list[tuple[str, float]]:
    means = {m: float(np.nanmean([r["monotonicity"] for r in strength_rows if r["metric"] == m]))
             for m in METRIC_NAMES}
    return sorted(means.items(), key=lambda t: (-t[1], t[0]))[:k]


def suite_table(matrices: Sequence[AlternativeMatrix], candidates: Sequence[str]) -> list[dict]:
    rows = []

    def add(kind, suite, frac, pct):
        rows.append({"suite": suite.label(), "kind": kind, "members": ";".join(suite.metrics),
                     "weights": ";".join(f"{w:g}" for w in suite.weights),
                     "pct_monotonic": pct, "pair_fraction": frac})

    for name, suite in PRESETS.items():
        add("preset", suite, *suite_monotonic_fraction(matrices, suite))
    for m in METRIC_NAMES:
        add("single", SuiteSpec.equal([m]), *suite_monotonic_fraction(matrices, SuiteSpec.equal([m])))
    for suite, frac, pct in search_suites(candidates, matrices):
        add("search", suite, frac, pct)
    return rows


def _write_csv(path: Path, rows: list[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) if isinstance(r[c], float) else r[c] for c in columns])


def build_reports(store: ResultStore | str | Path, out_dir: str | Path | None = None, top_k: int = 7) -> dict:
    """Write strength scores, heatmap, boxplot data, suite report and summary JSON."""
    store = store if isinstance(store, ResultStore) else ResultStore(store)
    out = Path(out_dir) if out_dir else store.path / "reports"
    out.mkdir(parents=True, exist_ok=True)
    data, meta, nodes = _collect(store)
    if not data:
        raise DataError("result store is empty")

    strength = strength_table(data, meta, nodes)
    _write_csv(out / "strength_scores.csv", strength,
               ["metric", "dataset", "anonymizer", "deanonymizer", "strength_type",
                "monotonicity", "evenness", "shared_range"])

    sids = sorted(data)
    mono = {(r["metric"], r["scenario_id"]): r["monotonicity"] for r in strength}
    with open(out / "heatmap.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", *sids])
        for m in METRIC_NAMES:
            w.writerow([m, *(_fmt(mono[(m, s)]) for s in sids)])

    box = []
    for m in METRIC_NAMES:
        for crit in ("monotonicity", "evenness", "shared_range"):
            v = np.array([r[crit] for r in strength if r["metric"] == m], dtype=float)
            v = v[np.isfinite(v)]
            q = np.quantile(v, [0, 0.25, 0.5, 0.75, 1]) if len(v) else [float("nan")] * 5
            box.append({"metric": m, "criterion": crit, "n": len(v), "mean": float(v.mean()) if len(v) else float("nan"),
                        "min": float(q[0]), "q1": float(q[1]), "median": float(q[2]), "q3": float(q[3]),
                        "max": float(q[4])})
    _write_csv(out / "boxplot.csv", box, ["metric", "criterion", "n", "mean", "min", "q1", "median", "q3", "max"])

    matrices = scenario_matrices(data)
    top = top_monotonic(strength, top_k)
    suites = suite_table(matrices, [m for m, _ in top])
    _write_csv(out / "suites.csv", suites, ["suite", "kind", "members", "weights", "pct_monotonic", "pair_fraction"])

    singles = [r for r in suites if r["kind"] == "single"]
    best_single = max(singles, key=lambda r: (r["pct_monotonic"], r["pair_fraction"]))
    searched = [r for r in suites if r["kind"] == "search"]
    summary = {
        "scenarios": len(sids),
        "metric_ranking": [
            {"metric": m,
             "monotonicity": float(np.nanmean([r["monotonicity"] for r in strength if r["metric"] == m])),
             "evenness": float(np.mean([r["evenness"] for r in strength if r["metric"] == m])),
             "shared_range": float(np.mean([r["shared_range"] for r in strength if r["metric"] == m]))}
            for m, _ in top_monotonic(strength, len(METRIC_NAMES))
        ],
        "top_monotonic": [m for m, _ in top],
        "best_individual": {"metric": best_single["members"], "pct_monotonic": best_single["pct_monotonic"]},
        "best_suite": searched[0] if searched else None,
        "presets": {r["suite"]: r["pct_monotonic"] for r in suites if r["kind"] == "preset"},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary
