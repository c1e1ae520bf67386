"""Global-structure attacks (DV, JLSB, ADA), all run inside degree chunks."""
from __future__ import annotations

import networkx as nx
import numpy as np
from scipy.sparse import csgraph

from ..estimate import AdversaryEstimate
from ._base import (
    AuxiliaryKnowledge,
    DeanonConfig,
    build_estimate,
    chunk_partition,
    distance_similarity,
    greedy_assignment,
    seed_distance_vectors,
)


def _seed_vectors(k: AuxiliaryKnowledge, pairs):
    sentinel = max(k.aux.node_count, k.anon.node_count)
    d_aux = seed_distance_vectors(k.aux, [a for a, _ in pairs], sentinel)
    d_anon = seed_distance_vectors(k.anon, [b for _, b in pairs], sentinel)
    return d_aux, d_anon


def _chunks(k: AuxiliaryKnowledge, chunk_size):
    return chunk_partition(
        k.anon, k.aux, chunk_size,
        exclude_anon=[b for _, b in k.seeds.pairs],
        exclude_aux=[a for a, _ in k.seeds.pairs],
    )


def _collect(rows, matched, sim, an, ax, theta):
    for col, v in enumerate(an):
        rows[int(v)] = (ax, sim[:, col])
    matched.update(greedy_assignment(sim, ax, an, theta))


def deanon_dv(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Distance-vector matching.

    Each node is described by its hop distances to the seeds (unreachable:
    the larger graph's node count); similarity is ``1/(1 + L1/#seeds)``.
    """
    cfg = cfg or DeanonConfig("DV")
    d_aux, d_anon = _seed_vectors(k, k.seeds.pairs)
    rows, matched = {}, {}
    for an, ax in _chunks(k, cfg.chunk_size):
        if len(an) == 0 or len(ax) == 0:
            continue
        sim = distance_similarity(d_aux[ax], d_anon[an])
        _collect(rows, matched, sim, an, ax, cfg.theta)
    return build_estimate(rows, k, cfg.chunk_size, matched)


def degree_similarity(deg_aux: np.ndarray, deg_anon: np.ndarray) -> np.ndarray:
    """``min/max`` degree ratio (1 when both are 0)."""
    lo = np.minimum.outer(deg_aux, deg_anon).astype(np.float64)
    hi = np.maximum.outer(deg_aux, deg_anon).astype(np.float64)
    return np.divide(lo, hi, out=np.ones_like(lo), where=hi > 0)


def neighbor_profiles(g, nodes, width: int) -> np.ndarray:
    """Neighbour degrees sorted descending, zero-padded/truncated to ``width``."""
    out = np.zeros((len(nodes), width))
    deg = g.degrees
    for i, v in enumerate(nodes):
        d = np.sort(deg[g.neighbors(v)])[::-1][:width]
        out[i, :len(d)] = d
    return out


def cosine_similarity(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    nx_ = np.linalg.norm(x, axis=1)
    ny_ = np.linalg.norm(y, axis=1)
    dot = x @ y.T
    denom = np.outer(nx_, ny_)
    out = np.divide(dot, denom, out=np.zeros_like(dot), where=denom > 0)
    out[np.outer(nx_ == 0, ny_ == 0)] = 1.0
    return np.clip(out, 0.0, 1.0)


def deanon_jlsb(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Weighted structural similarity: degree, neighbourhood and reference distance."""
    cfg = cfg or DeanonConfig("JLSB")
    w_deg, w_nb, w_ref = cfg.jlsb_weights
    d_aux, d_anon = _seed_vectors(k, k.seeds.pairs)
    rows, matched = {}, {}
    for an, ax in _chunks(k, cfg.chunk_size):
        if len(an) == 0 or len(ax) == 0:
            continue
        s_deg = degree_similarity(k.aux.degrees[ax], k.anon.degrees[an])
        width = int(max(k.aux.degrees[ax].max(), k.anon.degrees[an].max(), 1))
        s_nb = cosine_similarity(neighbor_profiles(k.aux, ax, width), neighbor_profiles(k.anon, an, width))
        s_ref = distance_similarity(d_aux[ax], d_anon[an])
        total = w_deg * s_deg + w_nb * s_nb + w_ref * s_ref
        _collect(rows, matched, total, an, ax, cfg.theta)
    return build_estimate(rows, k, cfg.chunk_size, matched)


def closeness(g) -> np.ndarray:
    """Closeness centrality, scaled by the reachable fraction for disconnected graphs."""
    n = g.node_count
    d = csgraph.shortest_path(g.adjacency, unweighted=True, directed=False)
    finite = np.isfinite(d)
    reach = finite.sum(axis=1) - 1
    tot = np.where(finite, d, 0).sum(axis=1)
    out = np.zeros(n)
    ok = (tot > 0) & (n > 1)
    out[ok] = (reach[ok] / tot[ok]) * (reach[ok] / (n - 1))
    return out


def betweenness(g, samples: int, seed) -> np.ndarray:
    """Brandes betweenness estimated from ``samples`` random sources."""
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    h.add_edges_from(map(tuple, g.edges().tolist()))
    kk = min(samples, g.node_count) if samples else None
    bc = nx.betweenness_centrality(h, k=kk, seed=seed, normalized=True)
    return np.array([bc[v] for v in range(g.node_count)])


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    return np.zeros_like(x) if hi == lo else (x - lo) / (hi - lo)


def structural_similarity(f_aux: np.ndarray, f_anon: np.ndarray) -> np.ndarray:
    """``1 -`` mean absolute difference of features min-max scaled over both sides."""
    n_a = len(f_aux)
    both = np.vstack([f_aux, f_anon])
    scaled = np.column_stack([_minmax(both[:, i]) for i in range(both.shape[1])])
    a, b = scaled[:n_a], scaled[n_a:]
    diff = np.abs(a[:, None, :] - b[None, :, :]).mean(axis=2)
    return 1.0 - diff


def inheritance_factor(epsilon: float, depth: int) -> float:
    return max(0.0, 1.0 - epsilon * depth)


def deanon_ada(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Adaptive de-anonymization.

    Per iteration and chunk, unmatched pairs are scored by
    ``w_dist*s_distance + w_struct*s_structural + w_inh*s_inheritance``.
    ``s_distance`` uses hop distances to every currently mapped pair;
    ``s_inheritance`` is the best ``(1 - eps*depth) * total`` over mapped
    neighbour pairs accepted at iteration ``depth`` (seeds contribute 0).
    Pairs above ``theta`` are accepted greedily and extend the mapped set;
    iteration stops when nothing new is accepted.
    """
    cfg = cfg or DeanonConfig("ADA")
    rng = np.random.default_rng(cfg.seed)
    w_dist, w_struct, w_inh = cfg.ada_weights
    aux, anon = k.aux, k.anon
    feats_aux = np.column_stack([
        closeness(aux), betweenness(aux, cfg.betweenness_samples, int(rng.integers(2**31))), aux.degrees,
    ])
    feats_anon = np.column_stack([
        closeness(anon), betweenness(anon, cfg.betweenness_samples, int(rng.integers(2**31))), anon.degrees,
    ])
    chunks = _chunks(k, cfg.chunk_size)
    mapped = list(k.seeds.pairs)  # (aux, anon)
    accepted: dict[tuple[int, int], tuple[int, float]] = {}  # pair -> (depth, total)
    free_aux = np.ones(aux.node_count, dtype=bool)
    free_anon = np.ones(anon.node_count, dtype=bool)
    for a, b in mapped:
        free_aux[a] = free_anon[b] = False
    rows, matched = {}, {}

    for depth in range(1, cfg.max_iterations + 1):
        d_aux, d_anon = _seed_vectors(k, mapped)
        new_pairs = []
        for an, ax in chunks:
            an = an[free_anon[an]]
            ax = ax[free_aux[ax]]
            if len(an) == 0 or len(ax) == 0:
                continue
            s_dist = distance_similarity(d_aux[ax], d_anon[an])
            s_struct = structural_similarity(feats_aux[ax], feats_anon[an])
            s_inh = np.zeros_like(s_dist)
            if w_inh > 0 and accepted:
                pa = {int(v): i for i, v in enumerate(ax)}
                pb = {int(v): i for i, v in enumerate(an)}
                for (a, b), (dpt, tot) in accepted.items():
                    val = inheritance_factor(cfg.ada_epsilon, dpt) * tot
                    if val <= 0:
                        continue
                    rr = [pa[x] for x in aux.neighbors(a).tolist() if x in pa]
                    cc = [pb[y] for y in anon.neighbors(b).tolist() if y in pb]
                    if rr and cc:
                        blk = s_inh[np.ix_(rr, cc)]
                        s_inh[np.ix_(rr, cc)] = np.maximum(blk, val)
            total = w_dist * s_dist + w_struct * s_struct + w_inh * s_inh
            for col, v in enumerate(an):
                rows[int(v)] = (ax, total[:, col])
            pos_a = {int(v): i for i, v in enumerate(ax)}
            pos_b = {int(v): i for i, v in enumerate(an)}
            for b, a in greedy_assignment(total, ax, an, cfg.theta):
                new_pairs.append((a, b, float(total[pos_a[a], pos_b[b]])))
        if not new_pairs:
            break
        for a, b, tot in new_pairs:
            free_aux[a] = free_anon[b] = False
            mapped.append((a, b))
            accepted[(a, b)] = (depth, tot)
            matched[b] = a
    return build_estimate(rows, k, cfg.chunk_size, matched)
