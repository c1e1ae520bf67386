"""Seed-propagation attacks that only reason about neighbours of mapped nodes."""
from __future__ import annotations

from collections import deque

import numpy as np
from scipy import sparse

from ..estimate import AdversaryEstimate
from ._base import AuxiliaryKnowledge, DeanonConfig, build_estimate, chunk_partition


def _mapping_matrix(mapping: dict[int, int], n_anon: int, n_aux: int) -> sparse.csr_matrix:
    if not mapping:
        return sparse.csr_matrix((n_anon, n_aux))
    src = np.fromiter(mapping.keys(), dtype=np.int64)
    dst = np.fromiter(mapping.values(), dtype=np.int64)
    return sparse.csr_matrix((np.ones(len(src)), (src, dst)), shape=(n_anon, n_aux))


def _eccentricity(scores: np.ndarray) -> float:
    if len(scores) == 1:
        return np.inf
    sd = scores.std()
    if sd == 0:
        return 0.0
    top2 = np.partition(scores, -2)[-2:]
    return float((top2[1] - top2[0]) / sd)


def deanon_ns(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Narayanan-Shmatikov propagation.

    A candidate ``c`` for anonymized node ``v`` scores
    ``#{mapped neighbours u of v with map(u) adjacent to c} / sqrt(deg_aux(c))``.
    The top candidate is accepted when its eccentricity reaches ``theta`` and
    the reverse search from ``c`` picks ``v`` again. Scores are recomputed at
    the start of every sweep over the frontier; sweeps repeat until no new
    mapping is found.
    """
    cfg = cfg or DeanonConfig("NS")
    rng = np.random.default_rng(cfg.seed)
    anon, aux = k.anon, k.aux
    fwd = {b: a for a, b in k.seeds.pairs}  # anon -> aux
    rev = dict(k.seeds.pairs)  # aux -> anon
    seed_anon = set(fwd)
    inv_sqrt_aux = 1.0 / np.sqrt(np.maximum(aux.degrees, 1))
    inv_sqrt_anon = 1.0 / np.sqrt(np.maximum(anon.degrees, 1))
    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    for _ in range(anon.node_count + 1):
        m = _mapping_matrix(fwd, anon.node_count, aux.node_count)
        counts = (anon.adjacency @ m @ aux.adjacency).tocsr()
        counts_c = counts.tocsc()
        frontier = [v for v in np.flatnonzero(np.diff(counts.indptr)) if v not in fwd]
        if not frontier:
            break
        grew = False
        for v in rng.permutation(frontier):
            v = int(v)
            if v in fwd:
                continue
            lo, hi = counts.indptr[v], counts.indptr[v + 1]
            cand = counts.indices[lo:hi]
            cnt = counts.data[lo:hi]
            free = np.fromiter((c not in rev for c in cand), dtype=bool, count=len(cand))
            cand, cnt = cand[free], cnt[free]
            if len(cand) == 0:
                continue
            order = np.argsort(cand)
            cand, score = cand[order], cnt[order] * inv_sqrt_aux[cand[order]]
            rows[v] = (cand, score)
            if _eccentricity(score) < cfg.theta:
                continue
            c = int(cand[np.argmax(score)])
            # reverse check from the aux side
            lo, hi = counts_c.indptr[c], counts_c.indptr[c + 1]
            rc = counts_c.indices[lo:hi]
            rcnt = counts_c.data[lo:hi]
            free = np.fromiter((w not in fwd for w in rc), dtype=bool, count=len(rc))
            rc, rcnt = rc[free], rcnt[free]
            order = np.argsort(rc)
            rc, rscore = rc[order], rcnt[order] * inv_sqrt_anon[rc[order]]
            if len(rc) == 0 or _eccentricity(rscore) < cfg.theta or int(rc[np.argmax(rscore)]) != v:
                continue
            fwd[v] = c
            rev[c] = v
            grew = True
        if not grew:
            break

    matched = {v: a for v, a in fwd.items() if v not in seed_anon}
    return build_estimate({v: r for v, r in rows.items() if v not in seed_anon}, k, None, matched)


def deanon_kl(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Korula-Lattanzi similarity-witness matching inside degree chunks.

    ``w(i, j)`` counts mapped pairs ``(a, b)`` with ``a`` adjacent to aux
    node ``i`` and ``b`` adjacent to anonymized node ``j``. The single best
    pair (ties: lowest anon id, then aux id) is accepted while its count is
    at least ``theta``; every acceptance adds witnesses around it.
    """
    cfg = cfg or DeanonConfig("KL")
    anon, aux = k.anon, k.aux
    seed_aux = [a for a, _ in k.seeds.pairs]
    seed_anon = [b for _, b in k.seeds.pairs]
    chunks = chunk_partition(anon, aux, cfg.chunk_size, exclude_anon=seed_anon, exclude_aux=seed_aux)

    m0 = _mapping_matrix({b: a for a, b in k.seeds.pairs}, anon.node_count, aux.node_count)
    base = (aux.adjacency @ m0.T @ anon.adjacency).tocsr()  # (aux, anon) witness counts
    blocks = []
    pos_aux = np.full(aux.node_count, -1)
    pos_anon = np.full(anon.node_count, -1)
    for ci, (an, ax) in enumerate(chunks):
        w = base[ax][:, an].toarray() if len(an) and len(ax) else np.zeros((len(ax), len(an)))
        blocks.append(w)
        pos_aux[ax] = np.arange(len(ax))
        pos_anon[an] = np.arange(len(an))
    chunk_of_aux = np.full(aux.node_count, -1)
    chunk_of_anon = np.full(anon.node_count, -1)
    for ci, (an, ax) in enumerate(chunks):
        chunk_of_aux[ax] = ci
        chunk_of_anon[an] = ci

    free_r = [np.ones(len(ax), dtype=bool) for _, ax in chunks]
    free_c = [np.ones(len(an), dtype=bool) for an, _ in chunks]

    def best_in(ci):
        w = blocks[ci]
        if w.size == 0 or not free_r[ci].any() or not free_c[ci].any():
            return None
        sub = np.where(free_r[ci][:, None] & free_c[ci][None, :], w, -1.0)
        mx = sub.max()
        if mx < cfg.theta or mx <= 0:
            return None
        r, c = np.nonzero(sub == mx)
        an, ax = chunks[ci]
        i = np.lexsort((ax[r], an[c]))[0]
        return (mx, int(an[c[i]]), int(ax[r[i]]), int(r[i]), int(c[i]))

    best = [best_in(ci) for ci in range(len(chunks))]
    matched: dict[int, int] = {}
    while True:
        live = [b for b in best if b is not None]
        if not live:
            break
        mx = max(b[0] for b in live)
        _, j, i, r, c = min((b for b in live if b[0] == mx), key=lambda b: (b[1], b[2]))
        ci = chunk_of_anon[j]
        free_r[ci][r] = False
        free_c[ci][c] = False
        matched[j] = i
        # new witnesses around the accepted pair
        na, nb = aux.neighbors(i), anon.neighbors(j)
        touched = set()
        ca, cb = chunk_of_aux[na], chunk_of_anon[nb]
        for cj in np.intersect1d(ca[ca >= 0], cb[cb >= 0]):
            rr = pos_aux[na[ca == cj]]
            cc = pos_anon[nb[cb == cj]]
            blocks[cj][np.ix_(rr, cc)] += 1
            touched.add(int(cj))
        touched.add(int(ci))
        for cj in touched:
            best[cj] = best_in(cj)

    rows = {}
    for ci, (an, ax) in enumerate(chunks):
        w = blocks[ci]
        for col, v in enumerate(an):
            if w.shape[0] and w[:, col].any():
                rows[int(v)] = (ax, w[:, col])
    return build_estimate(rows, k, cfg.chunk_size, matched)


def deanon_yg(k: AuxiliaryKnowledge, cfg: DeanonConfig | None = None) -> AdversaryEstimate:
    """Yartseva-Grossglauser percolation graph matching.

    Each used mapping ``(a, b)`` adds one mark to every pair in
    ``N(a) x N(b)``; a pair whose marks reach ``theta`` while both endpoints
    are unmatched becomes a new mapping and joins the FIFO queue.
    """
    cfg = cfg or DeanonConfig("YG")
    rng = np.random.default_rng(cfg.seed)
    anon, aux = k.anon, k.aux
    theta = cfg.theta
    marks = np.zeros((aux.node_count, anon.node_count), dtype=np.int32)
    used_aux = np.zeros(aux.node_count, dtype=bool)
    used_anon = np.zeros(anon.node_count, dtype=bool)
    seeds = list(k.seeds.pairs)
    for a, b in seeds:
        used_aux[a] = used_anon[b] = True
    queue = deque(seeds[i] for i in rng.permutation(len(seeds)))
    matched: dict[int, int] = {}
    while queue:
        a, b = queue.popleft()
        na, nb = aux.neighbors(a), anon.neighbors(b)
        if len(na) == 0 or len(nb) == 0:
            continue
        block = marks[np.ix_(na, nb)]
        block += 1
        marks[np.ix_(na, nb)] = block
        r, c = np.nonzero(block >= theta)
        if len(r) == 0:
            continue
        order = np.lexsort((na[r], nb[c]))
        for idx in order:
            i, j = int(na[r[idx]]), int(nb[c[idx]])
            if used_aux[i] or used_anon[j]:
                continue
            used_aux[i] = used_anon[j] = True
            matched[j] = i
            queue.append((i, j))

    seed_aux = np.array([a for a, _ in seeds])
    seed_anon = {b for _, b in seeds}
    keep_aux = np.ones(aux.node_count, dtype=bool)
    keep_aux[seed_aux] = False
    rows = {}
    cols = np.flatnonzero(marks.any(axis=0))
    for j in cols:
        if int(j) in seed_anon:
            continue
        col = marks[:, j]
        nz = np.flatnonzero((col > 0) & keep_aux)
        if len(nz):
            rows[int(j)] = (nz, col[nz].astype(np.float64))
    return build_estimate(rows, k, None, matched)
