"""Undirected simple graphs, edge-list ingestion, sampling and statistics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "Graph",
    "GraphStats",
    "NodeMapping",
    "EdgeListError",
    "load_edge_list",
    "write_edge_list",
    "largest_connected_component",
    "permute_node_ids",
    "sample_auxiliary",
    "compute_graph_stats",
    "write_stats_csv",
    "validate_graph",
]


class EdgeListError(ValueError):
    """Malformed edge-list input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph in CSR form.

    Node ids are ``0..node_count-1``; ``labels[i]`` is the source identifier
    of node ``i``. Neighbor lists are sorted ascending.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: tuple[str, ...]

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int]] | np.ndarray,
        labels: Sequence[str] | None = None,
    ) -> Graph:
        """Build a graph, dropping self-loops and duplicate edges."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint outside 0..node_count-1")
        arr = arr[arr[:, 0] != arr[:, 1]]
        both = np.concatenate([arr, arr[:, ::-1]])
        if both.size:
            keys = np.unique(both[:, 0] * node_count + both[:, 1])
            src, dst = np.divmod(keys, node_count)
        else:
            src = dst = np.empty(0, dtype=np.int64)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        if labels is None:
            labels = [str(i) for i in range(node_count)]
        if len(labels) != node_count:
            raise ValueError("labels length must equal node_count")
        indptr.setflags(write=False)
        dst = np.ascontiguousarray(dst, dtype=np.int64)
        dst.setflags(write=False)
        return cls(indptr, dst, tuple(str(x) for x in labels))

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix (float64)."""
        n = self.node_count
        data = np.ones(len(self.indices), dtype=np.float64)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    @cached_property
    def neighbor_sets(self) -> list[frozenset[int]]:
        return [frozenset(self.neighbors(v).tolist()) for v in range(self.node_count)]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Edge array of shape (m, 2) with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.node_count), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def induced_subgraph(self, nodes: Sequence[int] | np.ndarray) -> Graph:
        """Subgraph induced by ``nodes``; new id ``i`` corresponds to ``nodes[i]``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = self.edges()
        e = remap[e]
        e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
        return Graph.from_edges(len(nodes), e, [self.labels[i] for i in nodes])

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"


@dataclass(frozen=True)
class NodeMapping:
    """Partial bijection between the node ids of two graphs."""

    pairs: tuple[tuple[int, int], ...]
    is_ground_truth: bool = True
    _fwd: dict = field(init=False, repr=False, compare=False)
    _rev: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fwd = dict(self.pairs)
        rev = {b: a for a, b in self.pairs}
        if len(fwd) != len(self.pairs) or len(rev) != len(self.pairs):
            raise ValueError("mapping is not injective")
        object.__setattr__(self, "_fwd", fwd)
        object.__setattr__(self, "_rev", rev)

    @classmethod
    def from_dict(cls, d: dict[int, int], is_ground_truth: bool = True) -> NodeMapping:
        return cls(tuple(sorted((int(a), int(b)) for a, b in d.items())), is_ground_truth)

    def __len__(self) -> int:
        return len(self.pairs)

    def get(self, src: int, default=None):
        return self._fwd.get(src, default)

    def inverse_get(self, dst: int, default=None):
        return self._rev.get(dst, default)

    def as_dict(self) -> dict[int, int]:
        return dict(self._fwd)

    def inverse(self) -> NodeMapping:
        return NodeMapping(tuple(sorted((b, a) for a, b in self.pairs)), self.is_ground_truth)

    def compose(self, other: NodeMapping) -> NodeMapping:
        """``other ∘ self``: maps ``a`` to ``other[self[a]]`` where both exist."""
        out = {a: other._fwd[b] for a, b in self.pairs if b in other._fwd}
        return NodeMapping.from_dict(out, self.is_ground_truth and other.is_ground_truth)


@dataclass(frozen=True)
class GraphStats:
    nodes: int
    edges: int
    diameter: int
    avg_degree: float
    avg_shortest_path: float
    clustering_coefficient: float
    degree_gini: float
    claws: int

    CSV_COLUMNS = (
        "Nodes", "Edges", "Diameter", "Avg. degree", "Avg. shortest path",
        "Clustering coefficient", "Gini coefficient", "Claws",
    )

    def as_row(self) -> list:
        return [
            self.nodes, self.edges, self.diameter, self.avg_degree,
            self.avg_shortest_path, self.clustering_coefficient,
            self.degree_gini, self.claws,
        ]


def validate_graph(g: Graph) -> None:
    """Raise ``AssertionError`` unless ``g`` is symmetric, simple, dense-id."""
    n = g.node_count
    assert len(g.labels) == n
    assert g.indptr[0] == 0 and g.indptr[-1] == len(g.indices)
    for v in range(n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0), f"neighbors of {v} not strictly sorted"
        assert not np.any(nb == v), f"self-loop at {v}"
        assert np.all((nb >= 0) & (nb < n))
    a = g.adjacency
    assert (a != a.T).nnz == 0, "adjacency not symmetric"


def load_edge_list(path: str | Path) -> Graph:
    """Read a whitespace-separated edge list (Konect style).

    Blank lines and lines starting with ``%`` or ``#`` are skipped; tokens
    beyond the first two (weights, timestamps) are ignored.
    """
    ids: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s[0] in "%#":
                continue
            tok = s.split()
            if len(tok) < 2:
                raise EdgeListError(f"{path}:{lineno}: expected at least 2 tokens, got {len(tok)}")
            u = ids.setdefault(tok[0], len(ids))
            v = ids.setdefault(tok[1], len(ids))
            edges.append((u, v))
    return Graph.from_edges(len(ids), edges, list(ids))


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{g.labels[u]} {g.labels[v]}\n")


def _components(g: Graph) -> np.ndarray:
    _, comp = csgraph.connected_components(g.adjacency, directed=False)
    return comp


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph of the largest component.

    Ties go to the component holding the smallest source label.
    """
    if g.node_count == 0:
        raise ValueError("empty graph has no connected component")
    comp = _components(g)
    sizes = np.bincount(comp)
    best = None
    for c in np.flatnonzero(sizes == sizes.max()):
        lab = min(g.labels[i] for i in np.flatnonzero(comp == c))
        if best is None or lab < best[0]:
            best = (lab, c)
    return g.induced_subgraph(np.flatnonzero(comp == best[1]))


def _relabel(g: Graph, perm: np.ndarray) -> Graph:
    """Graph with node ``v`` renamed ``perm[v]``."""
    e = perm[g.edges()] if g.edge_count else np.empty((0, 2), dtype=np.int64)
    labels = [""] * g.node_count
    for v, p in enumerate(perm):
        labels[p] = g.labels[v]
    return Graph.from_edges(g.node_count, e, labels)


def permute_node_ids(g: Graph, seed) -> tuple[Graph, NodeMapping]:
    """Relabel nodes by a uniform random permutation.

    Labels of the returned graph are the new ids, so no source identifier
    survives. The mapping sends old id to new id.
    """
    rng = np.random.default_rng(seed)
    perm = rng.permutation(g.node_count)
    e = perm[g.edges()] if g.edge_count else np.empty((0, 2), dtype=np.int64)
    out = Graph.from_edges(g.node_count, e)
    return out, NodeMapping(tuple((v, int(p)) for v, p in enumerate(perm)))


def sample_auxiliary(g: Graph, ratio: float, seed) -> tuple[Graph, NodeMapping]:
    """Uniform node sample of size ``ceil(ratio*|V|)``, induced, reduced to its LCC.

    Returns the auxiliary graph and the correspondence aux-id -> g-id.
    """
    if not 0 < ratio <= 1:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    n = g.node_count
    if ratio == 1:
        return g, NodeMapping(tuple((v, v) for v in range(n)))
    rng = np.random.default_rng(seed)
    k = math.ceil(ratio * n)
    nodes = np.sort(rng.choice(n, size=k, replace=False))
    sub = g.induced_subgraph(nodes)
    comp = _components(sub)
    sizes = np.bincount(comp)
    # ties: component containing the smallest original id
    best = min(np.flatnonzero(sizes == sizes.max()), key=lambda c: np.flatnonzero(comp == c)[0])
    keep = np.flatnonzero(comp == best)
    aux = sub.induced_subgraph(keep)
    return aux, NodeMapping(tuple((i, int(nodes[j])) for i, j in enumerate(keep)))


def compute_graph_stats(g: Graph, path_sample: int = 1000, seed=0) -> GraphStats:
    """Table-style graph statistics.

    Diameter and average shortest path come from BFS over ``path_sample``
    random sources and are exact once ``path_sample >= |V|``.
    """
    if path_sample < 1:
        raise ValueError("path_sample must be >= 1")
    n = g.node_count
    if n == 0:
        raise ValueError("empty graph")
    if np.unique(_components(g)).size > 1:
        raise ValueError("graph is disconnected; reduce it with largest_connected_component first")
    deg = g.degrees.astype(np.int64)
    a = g.adjacency
    triangles = int(round((a @ a).multiply(a).sum() / 6))
    wedges = int(np.sum(deg * (deg - 1) // 2))
    clustering = 3 * triangles / wedges if wedges else 0.0
    claws = int(sum(math.comb(int(d), 3) for d in deg))

    if path_sample >= n:
        sources = np.arange(n)
    else:
        sources = np.random.default_rng(seed).choice(n, size=path_sample, replace=False)
    dist = csgraph.shortest_path(a, unweighted=True, directed=False, indices=sources)
    mask = np.ones_like(dist, dtype=bool)
    mask[np.arange(len(sources)), sources] = False
    diameter = int(dist.max()) if n > 1 else 0
    avg_sp = float(dist[mask].mean()) if n > 1 else 0.0

    return GraphStats(
        nodes=n,
        edges=g.edge_count,
        diameter=diameter,
        avg_degree=float(deg.mean()),
        avg_shortest_path=avg_sp,
        clustering_coefficient=float(clustering),
        degree_gini=gini(deg),
        claws=claws,
    )


def gini(values) -> float:
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = len(x)
    if n == 0 or x.sum() == 0:
        return 0.0
    i = np.arange(1, n + 1)
    return float(np.sum((2 * i - n - 1) * x) / (n * x.sum()))


def write_stats_csv(rows: dict[str, GraphStats], path: str | Path) -> None:
    """One CSV row per named graph, columns mirroring the dataset table."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["Dataset", *GraphStats.CSV_COLUMNS])
        for name, st in rows.items():
            w.writerow([name, *st.as_row()])
