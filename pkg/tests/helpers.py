"""Shared fixtures: random estimates, synthetic graphs and a straight-line metric oracle.

The oracle below is written per node with plain Python loops and ``math``,
directly from the metric definitions, and shares no code with the library.
"""
from __future__ import annotations

import math

import networkx as nx
import numpy as np

from graphprivacy import AdversaryEstimate, Graph


def nx_to_graph(h: nx.Graph) -> Graph:
    h = nx.convert_node_labels_to_integers(h)
    return Graph.from_edges(h.number_of_nodes(), list(h.edges()))


def plc_graph(n: int, m: int = 2, seed: int = 0) -> Graph:
    return nx_to_graph(nx.powerlaw_cluster_graph(n, m, 0.3, seed=seed))


def random_rows(rng: np.random.Generator, total: int = 20, aux_nodes: int = 25, max_cands: int = 8,
                p_absent: float = 0.2, p_tie: float = 0.15):
    """Random ``{anon: (cands, probs)}``, truth dict, plus sizes.

    Mixes in rows without the true node, rows with tied maxima and
    single-candidate rows.
    """
    attempted = int(rng.integers(0, total + 1))
    anon = rng.choice(total, size=attempted, replace=False)
    rows, truth = {}, {}
    for v in anon:
        n = int(rng.integers(1, max_cands + 1))
        cands = rng.choice(aux_nodes, size=n, replace=False)
        w = rng.random(n) + 1e-3
        if rng.random() < p_tie and n >= 2:
            w[:2] = w.max() + 0.5
        p = w / w.sum()
        rows[int(v)] = (cands.tolist(), p.tolist())
        if rng.random() < p_absent:
            absent = sorted(set(range(aux_nodes)) - set(cands.tolist()))
            truth[int(v)] = int(rng.choice(absent)) if absent else int(cands[0])
        else:
            truth[int(v)] = int(rng.choice(cands))
    return rows, truth, total, aux_nodes


def random_estimate(rng, **kw) -> AdversaryEstimate:
    rows, truth, total, aux = random_rows(rng, **kw)
    return AdversaryEstimate.from_rows(rows, truth, total, aux)


def oracle_metrics(rows, truth, total, aux_nodes, tau_q=0.01, tau_h=0.5, tau_i=0.5):
    """Per-graph value of every metric, one node at a time."""
    cap = math.log2(max(aux_nodes, 2))
    node = {k: [] for k in (
        "anonymity_set_size", "collision_entropy", "conditional_entropy", "conditional_privacy",
        "entropy", "inherent_privacy", "max_entropy", "min_entropy", "normalized_entropy",
        "quantiles_on_entropy", "information_surprisal", "mutual_information", "pearson_correlation",
        "relative_entropy", "absolute_error", "incorrectness", "mean_squared_error", "normalized_variance")}
    correct = hidden = innocent = 0
    for v in sorted(rows):
        cands, probs = rows[v]
        # argmax with lowest aux id on ties
        pairs = sorted(zip(cands, probs))
        t = truth.get(v, -1)
        p = [q for _, q in pairs]
        y = [1.0 if c == t else 0.0 for c, _ in pairs]
        n = len(p)
        pt = sum(q for (c, q) in pairs if c == t)
        pmax = max(p)
        guess = min(c for c, q in pairs if q == pmax)
        correct += guess == t
        hidden += pmax < tau_h
        innocent += pt < tau_i

        ass = sum(1 for q in p if q > 0)
        h1 = -sum(q * math.log2(q) for q in p if q > 0)
        h0 = math.log2(ass)
        hinf = -math.log2(pmax)
        h2 = -math.log2(sum(q * q for q in p))
        surv = [q for q in p if q >= tau_q]
        s = sum(surv)
        hq = -sum((q / s) * math.log2(q / s) for q in surv) if surv else 0.0
        ce = h1 if pt > 0 else cap
        node["anonymity_set_size"].append(ass)
        node["entropy"].append(h1)
        node["max_entropy"].append(h0)
        node["min_entropy"].append(hinf)
        node["collision_entropy"].append(h2)
        node["normalized_entropy"].append(h1 / h0 if ass > 1 else 0.0)
        node["inherent_privacy"].append(2 ** h1)
        node["quantiles_on_entropy"].append(hq)
        node["conditional_entropy"].append(ce)
        node["conditional_privacy"].append(2 ** ce)
        sur = -math.log2(pt) if pt > 0 else cap
        node["information_surprisal"].append(sur)
        node["relative_entropy"].append(sur)
        node["mutual_information"].append(max(0.0, math.log2(n) - h1))
        mp, my = sum(p) / n, sum(y) / n
        cov = sum((a - mp) * (b - my) for a, b in zip(p, y))
        vp = sum((a - mp) ** 2 for a in p)
        vy = sum((b - my) ** 2 for b in y)
        node["pearson_correlation"].append(cov / math.sqrt(vp * vy) if vp > 1e-15 and vy > 1e-15 else 0.0)
        node["absolute_error"].append(pmax - pt)
        node["incorrectness"].append(1 - pt)
        node["mean_squared_error"].append(sum((a - b) ** 2 for a, b in zip(p, y)) / n)
        if n > 1:
            d = [b - a for a, b in zip(p, y)]
            md = sum(d) / n
            var_d = sum((x - md) ** 2 for x in d) / (n - 1)
            node["normalized_variance"].append(var_d * n)  # Var(y) of a one-hot vector is 1/n
        else:
            node["normalized_variance"].append(0.0)

    a = len(rows)
    out = {k: (sum(v) / len(v) if v else 0.0) for k, v in node.items()}
    mean_ce = out["conditional_entropy"]
    out.update({
        "amount_leaked_information": float(correct),
        "conditional_privacy_loss": 1 - 2 ** mean_ce / 2 ** math.log2(total) if a else 0.0,
        "loss_of_anonymity": max(node["mutual_information"]) if a else 0.0,
        "percent_incorrectly_classified": (a - correct) / total,
        "adversary_success_rate": correct / a if a else 0.0,
        "adversary_overall_success": correct / total,
        "hiding_property": float(hidden + total - a),
        "user_specified_innocence": float(innocent + total - a),
    })
    return out
