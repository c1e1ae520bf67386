from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph
from scipy.spatial.distance import cdist

from ..estimate import AdversaryEstimate, normalize_scores
from ..graph import Graph, NodeMapping, sample_auxiliary

DEANONYMIZERS = ("NS", "KL", "YG", "DV", "JLSB", "ADA")
LOCAL = frozenset({"NS", "KL", "YG"})
CHUNKED = frozenset({"KL", "DV", "JLSB", "ADA"})

_DEFAULT_THETA = {"NS": 0.5, "KL": 1.0, "YG": 2.0, "DV": 0.0, "JLSB": 0.0, "ADA": 0.0}


@dataclass(frozen=True)
class AuxiliaryKnowledge:
    """What the adversary holds, plus the hidden truth used for scoring.

    ``seeds`` and ``truth`` both map aux ids to anonymized ids.
    """

    aux: Graph
    anon: Graph
    seeds: NodeMapping
    truth: NodeMapping

    def __post_init__(self):
        if len(self.seeds) < 1:
            raise ValueError("at least one seed mapping is required")
        for a, b in self.seeds.pairs:
            if self.truth.get(a) != b:
                raise ValueError(f"seed ({a}->{b}) is not part of the ground truth")
            if not (0 <= a < self.aux.node_count and 0 <= b < self.anon.node_count):
                raise ValueError("seed endpoint outside its graph")

    def anon_truth(self) -> dict[int, int]:
        """anon id -> aux id."""
        return {b: a for a, b in self.truth.pairs}


@dataclass(frozen=True)
class DeanonConfig:
    kind: str = "NS"
    theta: float | None = None
    chunk_size: int | None = 100
    jlsb_weights: tuple[float, float, float] = (0.3, 0.3, 0.4)  # degree, neighbor, ref distance
    ada_weights: tuple[float, float, float] = (0.6, 0.2, 0.2)  # distance, structural, inheritance
    ada_epsilon: float = 0.5
    betweenness_samples: int = 32
    max_iterations: int = 10
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in DEANONYMIZERS:
            raise ValueError(f"unknown de-anonymizer {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.theta is None:
            object.__setattr__(self, "theta", _DEFAULT_THETA[kind])
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        for name in ("jlsb_weights", "ada_weights"):
            w = getattr(self, name)
            if len(w) != 3 or abs(sum(w) - 1) > 1e-9 or min(w) < 0:
                raise ValueError(f"{name} must be three non-negative weights summing to 1")
        if kind == "YG" and self.theta < 1:
            raise ValueError("YG threshold must be >= 1")

    @property
    def effective_chunk(self) -> int | None:
        return self.chunk_size if self.kind in CHUNKED else None

    @property
    def label(self) -> str:
        return self.kind


def make_knowledge(
    g_orig: Graph,
    anon: tuple[Graph, NodeMapping],
    aux_ratio: float,
    seed_count: int,
    rng,
) -> AuxiliaryKnowledge:
    """Sample the auxiliary graph and draw seed mappings.

    ``anon`` is the anonymizer output: the graph and its orig -> anon map.
    Seeds are drawn uniformly from overlap nodes with degree >= 1 on both
    sides.
    """
    if seed_count < 1:
        raise ValueError("seed_count must be >= 1")
    ss = np.random.SeedSequence(rng) if not isinstance(rng, np.random.SeedSequence) else rng
    aux_seed, pick_seed = ss.spawn(2)
    g_anon, orig_to_anon = anon
    aux, aux_to_orig = sample_auxiliary(g_orig, aux_ratio, aux_seed)
    truth = aux_to_orig.compose(orig_to_anon)
    eligible = [(a, b) for a, b in truth.pairs if aux.degrees[a] >= 1 and g_anon.degrees[b] >= 1]
    if len(eligible) < seed_count:
        raise ValueError(f"overlap of {len(eligible)} nodes is smaller than seed_count={seed_count}")
    pick = np.random.default_rng(pick_seed).choice(len(eligible), size=seed_count, replace=False)
    seeds = NodeMapping(tuple(sorted(eligible[i] for i in pick)))
    return AuxiliaryKnowledge(aux=aux, anon=g_anon, seeds=seeds, truth=truth)


def degree_order(g: Graph, nodes) -> np.ndarray:
    """``nodes`` sorted by degree descending, lowest id first on ties."""
    nodes = np.asarray(nodes, dtype=np.int64)
    return nodes[np.lexsort((nodes, -g.degrees[nodes]))]


def chunk_partition(
    anon: Graph,
    aux: Graph,
    chunk_size: int | None,
    exclude_anon=(),
    exclude_aux=(),
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Degree-ordered block pairing of anonymized and auxiliary nodes.

    Chunk ``k`` of ``anon`` is only ever compared against chunk ``k`` of
    ``aux``. ``chunk_size=None`` (or one at least as large as both graphs)
    gives a single chunk.
    """
    if chunk_size is not None and chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    an = degree_order(anon, np.setdiff1d(np.arange(anon.node_count), np.asarray(exclude_anon, dtype=np.int64)))
    ax = degree_order(aux, np.setdiff1d(np.arange(aux.node_count), np.asarray(exclude_aux, dtype=np.int64)))
    if chunk_size is None:
        return [(an, ax)]
    n_chunks = max(-(-len(an) // chunk_size), -(-len(ax) // chunk_size), 1)
    return [
        (an[i * chunk_size:(i + 1) * chunk_size], ax[i * chunk_size:(i + 1) * chunk_size])
        for i in range(n_chunks)
    ]


def seed_distance_vectors(g: Graph, sources, sentinel: int) -> np.ndarray:
    """Hop distances from every node to each source, shape (n, len(sources))."""
    sources = np.asarray(sources, dtype=np.int64)
    if len(sources) == 0:
        return np.zeros((g.node_count, 0))
    d = csgraph.shortest_path(g.adjacency, unweighted=True, directed=False, indices=sources)
    d[~np.isfinite(d)] = sentinel
    return d.T


def distance_similarity(d_aux: np.ndarray, d_anon: np.ndarray) -> np.ndarray:
    """``1 / (1 + L1 / s)`` between every aux row and anon row (s = #sources)."""
    s = d_aux.shape[1]
    if s == 0:
        return np.ones((len(d_aux), len(d_anon)))
    l1 = cdist(d_aux, d_anon, "cityblock")
    return 1.0 / (1.0 + l1 / s)


def greedy_assignment(sim: np.ndarray, rows: np.ndarray, cols: np.ndarray, theta: float):
    """Highest-similarity-first matching without replacement.

    ``sim`` is indexed (aux row, anon col). Ties resolve lexicographically
    on (anon id, aux id). Only pairs with similarity above ``theta`` are
    admitted (``theta=0`` admits every positive pair).
    """
    if sim.size == 0:
        return []
    r, c = np.nonzero(sim > theta) if theta > 0 else np.nonzero(sim >= 0)
    vals = sim[r, c]
    order = np.lexsort((rows[r], cols[c], -vals))
    used_r, used_c, out = set(), set(), []
    limit = min(len(rows), len(cols))
    for i in order:
        a, b = r[i], c[i]
        if a in used_r or b in used_c:
            continue
        used_r.add(a)
        used_c.add(b)
        out.append((int(cols[b]), int(rows[a])))
        if len(out) == limit:
            break
    return out


def build_estimate(
    raw_rows: dict,
    k: AuxiliaryKnowledge,
    chunk_size_used: int | None,
    matched: dict[int, int] | None = None,
) -> AdversaryEstimate:
    rows = normalize_scores(raw_rows)
    return AdversaryEstimate.from_rows(
        rows,
        k.anon_truth(),
        total_nodes=k.anon.node_count,
        aux_nodes=k.aux.node_count,
        chunk_size_used=chunk_size_used,
        matched=None if matched is None else dict(matched),
    )
