"""Structural graph anonymization schemes.

Every public ``anonymize_*`` function is a pure function of its graph,
parameters and seed. :func:`anonymize` dispatches on an
:class:`AnonymizerConfig` and finishes with a random id permutation, so
its output never exposes the original identifiers.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .graph import Graph, NodeMapping, permute_node_ids

__all__ = [
    "ANONYMIZERS",
    "AnonymizerConfig",
    "anonymize",
    "anonymize_switch",
    "anonymize_kda",
    "kda_targets",
    "anonymize_dp",
    "dk2_series",
    "noisy_dk2",
    "anonymize_random_walk",
    "anonymize_tmeans",
    "tmeans_targets",
]

log = logging.getLogger(__name__)

ANONYMIZERS = ("IDremoval", "Switch", "kDA", "DP", "RandomWalk", "tMeans")
_ALIASES = {
    "idrem": "IDremoval", "idremoval": "IDremoval", "switch": "Switch",
    "kda": "kDA", "dp": "DP", "rw": "RandomWalk", "randomwalk": "RandomWalk",
    "tmeans": "tMeans",
}

DP_SENSITIVITY = 4.0


@dataclass(frozen=True)
class AnonymizerConfig:
    kind: str = "IDremoval"
    switch_fraction: float = 0.05
    k: int = 5
    epsilon: float = 1.0
    walk_distance: int = 2
    tmeans_max_size: int = 30
    seed: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind)
        if kind not in ANONYMIZERS:
            raise ValueError(f"unknown anonymizer {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.switch_fraction < 0:
            raise ValueError("switch_fraction must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.walk_distance < 1:
            raise ValueError("walk_distance must be >= 1")
        if self.tmeans_max_size < 1:
            raise ValueError("tmeans_max_size must be >= 1")

    @property
    def label(self) -> str:
        return self.kind


def anonymize(g: Graph, cfg: AnonymizerConfig, seed=None) -> tuple[Graph, NodeMapping]:
    """Anonymize ``g`` and permute ids; returns (graph, original -> anonymized)."""
    seed = cfg.seed if seed is None else seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    algo_seed, perm_seed = ss.spawn(2)
    rng = np.random.default_rng(algo_seed)
    if cfg.kind == "IDremoval":
        h = g
    elif cfg.kind == "Switch":
        h = anonymize_switch(g, cfg.switch_fraction, rng)
    elif cfg.kind == "kDA":
        h = anonymize_kda(g, cfg.k)
    elif cfg.kind == "DP":
        h = anonymize_dp(g, cfg.epsilon, rng)
    elif cfg.kind == "RandomWalk":
        h = anonymize_random_walk(g, cfg.walk_distance, rng)
    else:
        h = anonymize_tmeans(g, cfg.tmeans_max_size, rng)
    return permute_node_ids(h, perm_seed)


def _edge_set(g: Graph) -> set[tuple[int, int]]:
    return {(int(u), int(v)) for u, v in g.edges()}


def _from_edge_set(g: Graph, edges) -> Graph:
    e = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(g.node_count, e, g.labels)


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# --------------------------------------------------------------------------- Switch


def anonymize_switch(g: Graph, r: float, rng, max_retries: int = 100) -> Graph:
    """Perform ``floor(r*|E|)`` accepted double-edge swaps.

    A swap ``(a,b),(c,d) -> (a,d),(c,b)`` that would create a self-loop or
    a duplicate edge is rejected and redrawn; a step that exhausts
    ``max_retries`` is skipped.
    """
    rng = np.random.default_rng(rng)
    steps = math.floor(r * g.edge_count)
    if steps == 0 or g.edge_count < 2:
        return g
    edges = [tuple(map(int, e)) for e in g.edges()]
    present = set(edges)
    skipped = 0
    m = len(edges)
    for _ in range(steps):
        for _ in range(max_retries):
            i, j = rng.choice(m, size=2, replace=False)
            a, b = edges[i]
            c, d = edges[j]
            if rng.random() < 0.5:
                c, d = d, c
            if a == d or c == b:
                continue
            e1, e2 = _key(a, d), _key(c, b)
            if e1 == e2 or e1 in present or e2 in present:
                continue
            present.discard(edges[i])
            present.discard(edges[j])
            present.add(e1)
            present.add(e2)
            edges[i], edges[j] = e1, e2
            break
        else:
            skipped += 1
    if skipped:
        log.info("switch: %d of %d steps skipped after %d retries", skipped, steps, max_retries)
    return _from_edge_set(g, present)


# --------------------------------------------------------------------------- k-DA


def _group_cost(d: np.ndarray, lo: int, hi: int) -> int:
    """Edges needed to lift ``d[lo:hi]`` (descending) to ``d[lo]``."""
    return int(d[lo] * (hi - lo) - d[lo:hi].sum())


def kda_targets(degrees, k: int) -> np.ndarray:
    """Greedy k-anonymous target degrees (never below the input degree).

    Degrees are sorted descending and cut into consecutive groups of at
    least ``k``; a node joins the running group when that is cheaper than
    opening a new group at it. Each group's target is its maximum degree.
    """
    deg = np.asarray(degrees, dtype=np.int64)
    n = len(deg)
    if k <= 1 or n == 0:
        return deg.copy()
    if k > n:
        raise ValueError("k must not exceed the number of nodes")
    order = np.lexsort((np.arange(n), -deg))
    d = deg[order]
    starts = [0]
    i = k
    while i < n:
        if n - i < k:
            break  # remainder too small for its own group
        start = starts[-1]
        merge = (d[start] - d[i]) + _group_cost(d, i + 1, min(i + 1 + k, n))
        new = _group_cost(d, i, min(i + k, n))
        if merge <= new:
            i += 1
        else:
            starts.append(i)
            i += k
    bounds = starts + [n]
    target_sorted = np.empty(n, dtype=np.int64)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        target_sorted[lo:hi] = d[lo]
    target = np.empty(n, dtype=np.int64)
    target[order] = target_sorted
    # parity repair: lift one odd-sized group by one
    if (target.sum() - deg.sum()) % 2:
        groups = [(int(d[lo]), lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if (hi - lo) % 2]
        groups.sort()
        for tval, lo, hi in groups:
            if tval + 1 < n:
                target[order[lo:hi]] += 1
                break
    return target


def _wire_deficits(g: Graph, deficit: np.ndarray, present: set, fallback: bool = False) -> int:
    """Add edges among deficit nodes, largest deficit first. Returns residue.

    With ``fallback`` a node that runs out of deficit partners is joined to
    its lowest-degree non-neighbours instead.
    """
    deficit = deficit.copy()
    deg = g.degrees.astype(np.int64).copy()
    nbrs = [set(g.neighbors(v).tolist()) for v in range(g.node_count)]
    while True:
        cand = np.flatnonzero(deficit > 0)
        if len(cand) == 0:
            return 0
        order = cand[np.lexsort((cand, -deficit[cand]))]
        u = int(order[0])
        partners = [int(v) for v in order[1:] if int(v) not in nbrs[u]]
        if len(partners) < deficit[u] and fallback:
            others = np.lexsort((np.arange(g.node_count), deg))
            partners += [int(v) for v in others
                         if v != u and deficit[v] <= 0 and int(v) not in nbrs[u]]
        if not partners:
            return int(deficit.sum())
        for v in partners[: deficit[u]]:
            present.add(_key(u, v))
            nbrs[u].add(v)
            nbrs[v].add(u)
            deg[u] += 1
            deg[v] += 1
            deficit[v] -= 1
            deficit[u] -= 1
        if deficit[u] > 0:
            return int(deficit[deficit > 0].sum())


def _is_k_anonymous(degrees, k: int) -> bool:
    return min(Counter(np.asarray(degrees).tolist()).values()) >= k


def anonymize_kda(g: Graph, k: int, return_residue: bool = False, max_rounds: int = 20):
    """k-degree anonymity by edge addition only.

    Targets come from :func:`kda_targets`. Deficits are wired among deficit
    nodes first; when that is impossible the node is joined to low-degree
    non-neighbours and the targets are recomputed on the new degrees, until
    the degree sequence is k-anonymous or ``max_rounds`` is reached.
    With ``return_residue`` the final unwired deficit is returned as well.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > g.node_count:
        raise ValueError("k must not exceed the number of nodes")
    present = _edge_set(g)
    cur = g
    residue = 0
    for _ in range(max_rounds):
        if _is_k_anonymous(cur.degrees, k):
            residue = 0
            break
        target = kda_targets(cur.degrees, k)
        deficit = target - cur.degrees
        residue = _wire_deficits(cur, deficit, present, fallback=True)
        cur = _from_edge_set(g, present)
    else:
        if not _is_k_anonymous(cur.degrees, k):
            residue = max(residue, 1)
    if residue:
        log.warning("k-DA: degree sequence not %d-anonymous, residue %d", k, residue)
    return (cur, residue) if return_residue else cur


# --------------------------------------------------------------------------- DP


def dk2_series(g: Graph) -> Counter:
    """Joint degree counts ``{(d1, d2): edges}`` with ``d1 <= d2``."""
    deg = g.degrees
    e = g.edges()
    c: Counter = Counter()
    for u, v in e:
        a, b = int(deg[u]), int(deg[v])
        c[(a, b) if a <= b else (b, a)] += 1
    return c


def noisy_dk2(series: Counter, epsilon: float, rng) -> Counter:
    """Laplace-perturbed dK-2 series, rounded and clamped at zero.

    Noise of scale ``DP_SENSITIVITY / epsilon`` is added to each entry present
    in ``series``; ``epsilon=inf`` returns an exact copy.
    """
    rng = np.random.default_rng(rng)
    out: Counter = Counter()
    scale = DP_SENSITIVITY / epsilon
    for key in sorted(series):
        v = series[key] + (rng.laplace(0.0, scale) if scale > 0 else 0.0)
        v = max(0, int(round(v)))
        if v:
            out[key] = v
    return out


def _class_stubs(series: Counter) -> Counter:
    stubs: Counter = Counter()
    for (a, b), m in series.items():
        stubs[a] += m
        stubs[b] += m
    return stubs


def _repair_series(series: Counter) -> Counter:
    """Make each class's stub total a multiple of its degree by trimming entries."""
    series = Counter(series)
    for d in sorted(_class_stubs(series), reverse=True):
        while (s := _class_stubs(series)[d]) % d:
            # drop one edge from the largest entry touching class d
            keys = [kk for kk in series if d in kk and series[kk] > 0]
            kk = max(keys, key=lambda t: (series[t], t))
            series[kk] -= 1
            if series[kk] == 0:
                del series[kk]
            if s - 1 <= 0:
                break
    return series


def anonymize_dp(g: Graph, epsilon: float, rng, max_retries: int = 50) -> Graph:
    """dK-2 perturbation followed by 2K stub-matching regeneration."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    rng = np.random.default_rng(rng)
    n = g.node_count
    series = _repair_series(noisy_dk2(dk2_series(g), epsilon, rng))
    if not series:
        log.warning("DP: noised dK-2 series is empty; returning edgeless graph")
        return Graph.from_edges(n, [], g.labels)

    stubs = _class_stubs(series)
    counts = {d: s // d for d, s in stubs.items()}
    total = sum(counts.values())
    if total > n:
        # too many nodes implied: drop edges from the smallest classes' entries
        log.info("DP: noised series implies %d nodes > %d; trimming", total, n)
        while sum(counts.values()) > n:
            d = min(c for c in counts if counts[c] > 0)
            keys = sorted(kk for kk in series if d in kk)
            series[keys[-1]] -= 1
            if series[keys[-1]] == 0:
                del series[keys[-1]]
            series = _repair_series(series)
            stubs = _class_stubs(series)
            counts = {c: s // c for c, s in stubs.items()}

    # assign node ids to degree classes, highest degree first
    next_id = 0
    stub_pool: dict[int, list[int]] = {}
    for d in sorted(counts, reverse=True):
        ids = list(range(next_id, next_id + counts[d]))
        next_id += counts[d]
        pool = [v for v in ids for _ in range(d)]
        rng.shuffle(pool)
        stub_pool[d] = pool

    edges: list[tuple[int, int]] = []
    for (a, b) in sorted(series):
        for _ in range(series[(a, b)]):
            if not stub_pool[a] or not stub_pool[b]:
                break
            u = stub_pool[a].pop()
            if not stub_pool[b]:
                stub_pool[a].append(u)
                break
            v = stub_pool[b].pop()
            edges.append((u, v))

    edges = _repair_multi_edges(edges, counts, rng, max_retries)
    perm = rng.permutation(n)
    e = perm[np.array(edges, dtype=np.int64).reshape(-1, 2)]
    return Graph.from_edges(n, e, g.labels)


def _repair_multi_edges(edges, counts, rng, max_retries):
    """Swap away self-loops and duplicates while keeping every endpoint's class."""
    cls = {}
    start = 0
    for d in sorted(counts, reverse=True):
        for v in range(start, start + counts[d]):
            cls[v] = d
        start += counts[d]
    edges = [_key(u, v) for u, v in edges]
    seen: Counter = Counter(edges)
    bad = [i for i, e in enumerate(edges) if e[0] == e[1] or seen[e] > 1]
    bad_set = set()
    for i in bad:
        e = edges[i]
        if e[0] != e[1] and seen[e] == 1:
            continue
        u, v = e
        fixed = False
        for _ in range(max_retries):
            j = int(rng.integers(len(edges)))
            x, y = edges[j]
            if rng.random() < 0.5:
                x, y = y, x
            if j == i or cls[y] != cls[v]:
                continue
            n1, n2 = _key(u, y), _key(x, v)
            if u == y or x == v or n1 == n2 or seen[n1] or seen[n2]:
                continue
            seen[edges[i]] -= 1
            seen[edges[j]] -= 1
            edges[i], edges[j] = n1, n2
            seen[n1] += 1
            seen[n2] += 1
            fixed = True
            break
        if not fixed:
            bad_set.add(i)
    if bad_set:
        log.info("DP: dropped %d unrepairable edges", len(bad_set))
    out = {e for i, e in enumerate(edges) if i not in bad_set and e[0] != e[1]}
    return sorted(out)


# --------------------------------------------------------------------------- Random walk


def anonymize_random_walk(g: Graph, t: int, rng) -> Graph:
    """Add an edge from every vertex to the end of a ``t``-hop random walk.

    Walks run on the input graph. As many original edges as were added are
    then deleted uniformly, so the edge count is unchanged.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    rng = np.random.default_rng(rng)
    original = [tuple(map(int, e)) for e in g.edges()]
    present = set(original)
    added = 0
    deg = g.degrees
    for v in rng.permutation(g.node_count):
        v = int(v)
        cur = v
        for _ in range(t):
            if deg[cur] == 0:
                break
            nb = g.neighbors(cur)
            cur = int(nb[rng.integers(len(nb))])
        e = _key(v, cur)
        if cur != v and e not in present:
            present.add(e)
            added += 1
    if added:
        drop = rng.choice(len(original), size=added, replace=False)
        for i in drop:
            present.discard(original[i])
    return _from_edge_set(g, present)


# --------------------------------------------------------------------------- t-Means


def tmeans_targets(degrees, max_size: int, n_iter: int = 50) -> np.ndarray:
    """Bounded 1-D k-means over degrees; each node's target is its center's degree."""
    deg = np.asarray(degrees, dtype=np.int64)
    n = len(deg)
    if n == 0 or max_size == 1:
        return deg.copy()
    order = np.lexsort((np.arange(n), deg))
    d = deg[order].astype(np.float64)
    t = max(1, math.ceil(n / max_size))
    centers = np.unique(np.quantile(d, (np.arange(t) + 0.5) / t))
    for _ in range(n_iter):
        assign = np.argmin(np.abs(d[:, None] - centers[None, :]), axis=1)
        new = np.array([d[assign == c].mean() for c in range(len(centers)) if np.any(assign == c)])
        if len(new) == len(centers) and np.allclose(new, centers):
            break
        centers = new
    assign = np.argmin(np.abs(d[:, None] - centers[None, :]), axis=1)
    # clusters as contiguous runs of the degree-sorted order
    clusters = [np.flatnonzero(assign == c) for c in range(len(centers)) if np.any(assign == c)]
    bounded: list[np.ndarray] = []
    while clusters:
        c = clusters.pop()
        if len(c) <= max_size:
            bounded.append(c)
        else:
            mid = len(c) // 2
            clusters.extend([c[:mid], c[mid:]])
    target_sorted = np.empty(n, dtype=np.int64)
    for c in bounded:
        vals = d[c]
        mean = vals.mean()
        # member closest to the mean; ties -> lowest node id
        dist = np.abs(vals - mean)
        cands = c[dist == dist.min()]
        center = cands[np.argmin(order[cands])]
        target_sorted[c] = int(d[center])
    target = np.empty(n, dtype=np.int64)
    target[order] = target_sorted
    return target


def anonymize_tmeans(g: Graph, max_size: int, rng, return_residue: bool = False):
    """Move degrees toward cluster-center degrees by adding and deleting edges."""
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    rng = np.random.default_rng(rng)
    target = tmeans_targets(g.degrees, max_size)
    diff = target - g.degrees
    present = _edge_set(g)
    if not diff.any():
        return (g, 0) if return_residue else g

    # deletions between surplus nodes
    surplus = np.maximum(-diff, 0)
    for u, v in sorted(present):
        if surplus[u] > 0 and surplus[v] > 0:
            present.discard((u, v))
            surplus[u] -= 1
            surplus[v] -= 1
    # remaining surplus: drop edges toward nodes without deficit constraints
    for u in rng.permutation(g.node_count):
        u = int(u)
        while surplus[u] > 0:
            nbrs = [v for v in g.neighbors(u).tolist() if _key(u, v) in present and diff[v] >= 0 and v != u]
            if not nbrs:
                break
            # prefer neighbours that will need extra degree anyway
            v = max(nbrs, key=lambda w: (diff[w], -w))
            present.discard(_key(u, v))
            surplus[u] -= 1
            if diff[v] >= 0:
                diff[v] += 1  # v lost an edge it must regain
    deficit = np.maximum(diff, 0)
    residue_in = int(surplus.sum())
    cur = _from_edge_set(g, present)
    residue_out = _wire_deficits(cur, deficit, present) if deficit.any() else 0
    residue = residue_in + residue_out
    if residue:
        log.info("t-Means: residual degree mismatch %d", residue)
    out = _from_edge_set(g, present)
    return (out, residue) if return_residue else out
