"""Acceptance checks, one test per criterion, each printing a single PASS/FAIL line.

Tolerances are pinned as module constants. Criteria 8 and 9 share one
desk-scale experiment run (two synthetic graphs, about 10-15 minutes on
one core).
"""
import csv
import time

import networkx as nx
import numpy as np
import pytest

from graphprivacy import (
    METRIC_NAMES,
    REGISTRY,
    AdversaryEstimate,
    AlternativeMatrix,
    AnonymizerConfig,
    DeanonConfig,
    ScenarioSeries,
    SuiteSpec,
    anonymize,
    deanonymize,
    evaluate_all,
    make_knowledge,
    monotonicity_score,
    wpm_scores,
)
from graphprivacy.graph import write_edge_list
from graphprivacy.harness import ExperimentConfig, Replication, build_reports, run_experiment
from graphprivacy.stats import cvm_statistic, rank_sum_test

from helpers import nx_to_graph, oracle_metrics, plc_graph, random_rows
from test_strength import oracle_score

RENYI_TOL = 1e-9
ORACLE_TOL = 1e-9
STATS_TOL = 1e-12
WPM_RATIO_RTOL = 1e-12  # float round-off only; orderings are compared exactly
GLOBAL_AGREEMENT = 0.05
MONO_TARGET = 0.8
ENTROPY_GAP = 0.2
SUITE_SLACK = 2.0  # percentage points
CHUNK = 100


def report(n, ok, detail, capsys):
    with capsys.disabled():
        print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------- 1


def test_criterion_01_metric_invariants(capsys):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_renyi = 0.0
    problems = 0
    for _ in range(10_000):
        rows, truth, total, aux = random_rows(rng, total=int(rng.integers(1, 30)), aux_nodes=40)
        e = AdversaryEstimate.from_rows(rows, truth, total, aux)
        r = evaluate_all(e)
        if e.attempted_count:
            h_inf, h2 = r["min_entropy"].per_node, r["collision_entropy"].per_node
            h1, h0 = r["entropy"].per_node, r["max_entropy"].per_node
            worst_renyi = max(worst_renyi, float(np.max(np.r_[h_inf - h2, h2 - h1, h1 - h0])))
            p_true = np.add.reduceat(e.prob * e.truth_mask, e.row_ptr[:-1])
            problems += int(np.any(r["incorrectness"].per_node != 1 - p_true))
            ne = r["normalized_entropy"].per_node
            problems += int(np.any((ne < 0) | (ne > 1)))
            problems += int(r["adversary_success_rate"].per_graph < r["adversary_overall_success"].per_graph)
    elapsed = time.perf_counter() - t0
    ok = worst_renyi <= RENYI_TOL and problems == 0 and elapsed < 60
    report(1, ok, f"10000 estimates, max Renyi violation {worst_renyi:.2e} (tol {RENYI_TOL}), "
                  f"{problems} other violations, {elapsed:.1f}s (< 60s)", capsys)


# ---------------------------------------------------------------------------- 2


def test_criterion_02_dual_implementation(capsys):
    rng = np.random.default_rng(7)
    worst, worst_metric = 0.0, ""
    for _ in range(100):
        rows, truth, total, aux = random_rows(rng, total=20, aux_nodes=20)
        got = evaluate_all(AdversaryEstimate.from_rows(rows, truth, total, aux))
        want = oracle_metrics(rows, truth, total, aux)
        for m in METRIC_NAMES:
            d = abs(got[m].per_graph - want[m])
            if d > worst:
                worst, worst_metric = d, m
    report(2, worst <= ORACLE_TOL,
           f"100 fixtures x 26 metrics, max abs diff {worst:.2e} ({worst_metric or 'none'}), tol {ORACLE_TOL}", capsys)


# ---------------------------------------------------------------------------- 3


@pytest.mark.filterwarnings("ignore:Precision loss")
def test_criterion_03_monotonicity_oracle(capsys):
    rng = np.random.default_rng(3)
    mismatches = 0
    for i in range(200):
        n_lv = int(rng.integers(2, 7))
        reps = int(rng.integers(2, 30))
        means = np.cumsum(rng.normal(0, 1, n_lv))
        levels = [rng.normal(m, rng.uniform(0.2, 2), reps) for m in means]
        desc = REGISTRY["entropy"] if i % 2 else REGISTRY["adversary_overall_success"]
        got = monotonicity_score(ScenarioSeries((i,), desc, tuple(levels)))
        mismatches += got != oracle_score(levels, desc.higher_better)
    dec = tuple(np.array([5.0, 5.1, 4.9, 5.05]) - 2 * i for i in range(6))
    perfect = monotonicity_score(ScenarioSeries(("p",), REGISTRY["entropy"], dec))
    reversed_ = monotonicity_score(ScenarioSeries(("r",), REGISTRY["entropy"], dec[::-1]))
    ok = mismatches == 0 and perfect == 1.0 and reversed_ == 0.0
    report(3, ok, f"200 series, {mismatches} mismatches; separated decreasing={perfect}, reversed={reversed_}",
           capsys)


# ---------------------------------------------------------------------------- 4


def test_criterion_04_statistics(capsys):
    p = rank_sum_test([1, 2], [3, 4]).p_value
    errs = []
    for n in (1, 3, 10, 250):
        grid = (2 * np.arange(1, n + 1) - 1) / (2 * n)
        errs.append(abs(cvm_statistic(grid) - 1 / (12 * n)))
    ok = abs(p - 1 / 3) <= STATS_TOL and max(errs) <= STATS_TOL
    report(4, ok, f"rank-sum p={p!r} (want 1/3), CvM grid max err {max(errs):.1e}, tol {STATS_TOL}", capsys)


# ---------------------------------------------------------------------------- 5


def test_criterion_05_wpm_properties(capsys):
    rng = np.random.default_rng(5)
    names = ("entropy", "adversary_overall_success", "pearson_correlation", "normalized_variance")
    fails = {"single": 0, "scaling": 0, "deletion": 0}

    def order(q):
        return np.argsort(-q, kind="stable").tolist()

    for _ in range(1000):
        x = rng.uniform(0.05, 10, (6, 4))
        m = AlternativeMatrix(tuple(range(6)), names, x)
        for j, name in enumerate(names):
            q = wpm_scores(m, SuiteSpec.equal([name]))
            key = x[:, j] if REGISTRY[name].higher_better else -x[:, j]
            fails["single"] += order(q) != order(key)
        w = rng.dirichlet(np.ones(4))
        w[-1] = 1 - w[:-1].sum()
        suite = SuiteSpec(tuple(zip(names, w.tolist())))
        q = wpm_scores(m, suite)
        scaled = AlternativeMatrix(m.alternatives, names, x * rng.uniform(0.1, 50, 4))
        fails["scaling"] += order(wpm_scores(scaled, suite)) != order(q)
        i = int(rng.integers(6))
        keep = [k for k in range(6) if k != i]
        q2 = wpm_scores(m.drop(i), suite)
        r1 = q[keep][:, None] / q[keep][None, :]
        r2 = q2[:, None] / q2[None, :]
        fails["deletion"] += not np.allclose(r1, r2, rtol=WPM_RATIO_RTOL, atol=0)
    report(5, not any(fails.values()), f"1000 matrices, failures {fails} (ratio rtol {WPM_RATIO_RTOL})", capsys)


# ---------------------------------------------------------------------------- 6


def test_criterion_06_chunking(capsys):
    t0 = time.perf_counter()
    g = plc_graph(1000, 8, seed=1)  # hub-heavy, so unchunked candidate sets grow large
    an = anonymize(g, AnonymizerConfig("IDremoval", seed=0))
    k = make_knowledge(g, an, 0.95, 100, np.random.SeedSequence(0))
    sizes = {kind: int(deanonymize(k, DeanonConfig(kind, chunk_size=CHUNK)).row_sizes.max())
             for kind in ("DV", "JLSB", "ADA", "KL", "NS", "YG")}
    elapsed = time.perf_counter() - t0
    ok = (all(sizes[x] <= CHUNK for x in ("DV", "JLSB", "ADA", "KL"))
          and all(sizes[x] > CHUNK for x in ("NS", "YG")) and elapsed < 300)
    report(6, ok, f"max anonymity set sizes {sizes} with chunk {CHUNK}, {elapsed:.1f}s (< 300s)", capsys)


# ---------------------------------------------------------------------------- 7


def test_criterion_07_success_rate_asymmetry(capsys):
    g = plc_graph(800, 2, seed=3)
    local_cases, local_bad = 0, 0
    for seeds in (5, 10, 20):
        for s in range(3):
            an = anonymize(g, AnonymizerConfig("Switch", seed=s))
            k = make_knowledge(g, an, 0.85, seeds, np.random.SeedSequence([seeds, s]))
            for kind in ("NS", "KL", "YG"):
                est = deanonymize(k, DeanonConfig(kind, seed=s))
                r = evaluate_all(est)
                sr, os_ = r["adversary_success_rate"].per_graph, r["adversary_overall_success"].per_graph
                if est.attempted_count < 0.5 * est.total_nodes and r["amount_leaked_information"].per_graph > 0:
                    local_cases += 1
                    local_bad += not sr > os_
    gaps, coverage = [], []
    for kind in ("DV", "JLSB", "ADA"):
        an = anonymize(g, AnonymizerConfig("IDremoval", seed=1))
        k = make_knowledge(g, an, 1.0, 5, np.random.SeedSequence(1))
        est = deanonymize(k, DeanonConfig(kind))
        r = evaluate_all(est)
        coverage.append(est.attempted_count / est.total_nodes)
        gaps.append(abs(r["adversary_success_rate"].per_graph - r["adversary_overall_success"].per_graph))
    ok = local_cases >= 3 and local_bad == 0 and max(gaps) <= GLOBAL_AGREEMENT and min(coverage) >= 0.95
    report(7, ok, f"{local_cases} local scenarios under 50% attempted, {local_bad} without SR > OS; "
                  f"global |SR-OS| max {max(gaps):.4f} (tol {GLOBAL_AGREEMENT}) at coverage >= {min(coverage):.3f}", capsys)


# ---------------------------------------------------------------------------- 8, 9


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    paths = []
    for name, n, seed in (("plc1000", 1000, 1), ("plc700", 700, 2)):
        path = root / f"{name}.edges"
        write_edge_list(nx_to_graph(nx.powerlaw_cluster_graph(n, 2, 0.3, seed=seed)), path)
        paths.append(str(path))
    cfg = ExperimentConfig(
        datasets=tuple(paths),
        anonymizers=(AnonymizerConfig("Switch"), AnonymizerConfig("kDA")),
        deanonymizers=(DeanonConfig("NS"), DeanonConfig("DV")),
        strength_types=("seeds",),
        replication=Replication(min=100, max=100),
        master_seed=8,
        output_dir=str(root / "store"),
    )
    t0 = time.perf_counter()
    store = run_experiment(cfg)
    summary = build_reports(store, root / "reports")
    return store, summary, time.perf_counter() - t0, root / "reports"


@pytest.mark.slow
def test_criterion_08_desk_pipeline(desk_run, capsys):
    _, summary, elapsed, _ = desk_run
    mono = {r["metric"]: r["monotonicity"] for r in summary["metric_ranking"]}
    success = [m for m in METRIC_NAMES if REGISTRY[m].category == "success"]
    best_success = max(mono[m] for m in success)
    ok = (mono["adversary_overall_success"] >= MONO_TARGET and mono["amount_leaked_information"] >= MONO_TARGET
          and mono["entropy"] <= best_success - ENTROPY_GAP and elapsed < 1800)
    report(8, ok, f"overall_success={mono['adversary_overall_success']:.3f}, "
                  f"leaked={mono['amount_leaked_information']:.3f} (>= {MONO_TARGET}); entropy={mono['entropy']:.3f} "
                  f"vs best success {best_success:.3f} (gap >= {ENTROPY_GAP}); {elapsed:.0f}s (< 1800s)", capsys)


@pytest.mark.slow
def test_criterion_09_suite_improvement(desk_run, capsys):
    _, summary, _, reports = desk_run
    with open(reports / "suites.csv") as fh:
        rows = list(csv.DictReader(fh))
    best_single = max(float(r["pct_monotonic"]) for r in rows if r["kind"] == "single")
    s3 = next(float(r["pct_monotonic"]) for r in rows if r["suite"] == "S3")
    best_search = max(float(r["pct_monotonic"]) for r in rows if r["kind"] == "search")
    ok = s3 >= best_single - SUITE_SLACK and best_search >= best_single
    report(9, ok, f"S3={s3:.1f}% vs best individual {best_single:.1f}% (slack {SUITE_SLACK}); "
                  f"best top-7 subset {best_search:.1f}% ({summary['best_suite']['suite']})", capsys)


# ---------------------------------------------------------------------------- 10


def test_criterion_10_determinism(tmp_path, capsys):
    path = tmp_path / "toy.edges"
    write_edge_list(plc_graph(200, 2, seed=9), path)
    cfg = ExperimentConfig(
        datasets=(str(path),),
        anonymizers=(AnonymizerConfig("Switch"), AnonymizerConfig("DP")),
        deanonymizers=(DeanonConfig("NS"), DeanonConfig("ADA")),
        seed_schedule=(2, 5, 10), aux_schedule=(0.7, 0.85, 1.0),
        replication=Replication(min=3, max=6, batch=3),
        per_node_replications=1, master_seed=42, output_dir=str(tmp_path / "store"),
    )
    names = ["manifest.json", "records.csv", "pernode.csv", "skipped.csv",
             "reports/strength_scores.csv", "reports/heatmap.csv", "reports/boxplot.csv",
             "reports/suites.csv", "reports/summary.json"]
    snapshots = []
    for _ in range(2):
        store = run_experiment(cfg)
        build_reports(store)
        snapshots.append({n: (store.path / n).read_bytes() for n in names})
    differing = [n for n in names if snapshots[0][n] != snapshots[1][n]]
    report(10, not differing, f"two runs, {len(names)} files compared, differing: {differing or 'none'}", capsys)
