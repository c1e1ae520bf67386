"""The adversary's probabilistic output, shared by attacks and metrics."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

__all__ = ["AdversaryEstimate", "normalize_scores"]


@dataclass(frozen=True, eq=False)
class AdversaryEstimate:
    """Candidate distributions for every attempted anonymized node.

    Rows are stored flat: row ``r`` covers ``cand[row_ptr[r]:row_ptr[r+1]]``
    and the matching slice of ``prob``. Candidates within a row are sorted
    by aux id, so ``argmax`` resolves ties toward the lowest id. ``true_aux``
    holds ``-1`` where the node has no counterpart in the auxiliary graph.
    """

    anon_ids: np.ndarray
    row_ptr: np.ndarray
    cand: np.ndarray
    prob: np.ndarray
    true_aux: np.ndarray
    total_nodes: int
    aux_nodes: int
    chunk_size_used: int | None = None
    matched: dict | None = None  # the attack's own anon -> aux assignment, if any

    def __post_init__(self):
        for name in ("anon_ids", "row_ptr", "cand", "prob", "true_aux"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        if len(self.row_ptr) != len(self.anon_ids) + 1:
            raise ValueError("row_ptr length mismatch")
        if self.attempted_count > self.total_nodes:
            raise ValueError("more attempted nodes than total nodes")

    @classmethod
    def from_rows(
        cls,
        rows: Mapping[int, tuple[Iterable[int], Iterable[float]]],
        truth: Mapping[int, int],
        total_nodes: int,
        aux_nodes: int,
        chunk_size_used: int | None = None,
        matched: dict | None = None,
    ) -> AdversaryEstimate:
        """Build from ``{anon_id: (aux_ids, probabilities)}`` (already normalized)."""
        anon = sorted(rows)
        ptr = [0]
        cands, probs = [], []
        for v in anon:
            c, p = rows[v]
            c = np.asarray(list(c), dtype=np.int64)
            p = np.asarray(list(p), dtype=np.float64)
            o = np.argsort(c, kind="stable")
            cands.append(c[o])
            probs.append(p[o])
            ptr.append(ptr[-1] + len(c))
        return cls(
            anon_ids=np.asarray(anon, dtype=np.int64),
            row_ptr=np.asarray(ptr, dtype=np.int64),
            cand=np.concatenate(cands) if cands else np.empty(0, dtype=np.int64),
            prob=np.concatenate(probs) if probs else np.empty(0, dtype=np.float64),
            true_aux=np.asarray([truth.get(v, -1) for v in anon], dtype=np.int64),
            total_nodes=int(total_nodes),
            aux_nodes=int(aux_nodes),
            chunk_size_used=chunk_size_used,
            matched=matched,
        )

    @property
    def attempted_count(self) -> int:
        return len(self.anon_ids)

    @property
    def row_sizes(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    @property
    def row_index(self) -> np.ndarray:
        """Row number of every flat entry."""
        return np.repeat(np.arange(self.attempted_count), self.row_sizes)

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        s = slice(self.row_ptr[r], self.row_ptr[r + 1])
        return self.cand[s], self.prob[s]

    @property
    def chosen(self) -> np.ndarray:
        """Argmax candidate per row (lowest aux id on ties)."""
        out = np.empty(self.attempted_count, dtype=np.int64)
        for r in range(self.attempted_count):
            c, p = self.row(r)
            out[r] = c[np.argmax(p)]
        return out

    @property
    def truth_mask(self) -> np.ndarray:
        """Flat indicator: entry is the row's true aux node."""
        return self.cand == self.true_aux[self.row_index]

    def check(self, tol: float = 1e-9) -> None:
        """Assert the estimate invariants."""
        assert np.all(self.prob >= 0)
        assert np.all(self.row_sizes >= 1)
        sums = np.add.reduceat(self.prob, self.row_ptr[:-1]) if self.attempted_count else np.empty(0)
        assert np.all(np.abs(sums - 1) <= tol), "rows must sum to 1"
        assert self.attempted_count <= self.total_nodes

    def to_jsonl(self, path: str | Path) -> None:
        """One JSON record per attempted node."""
        with open(path, "w", encoding="utf-8") as fh:
            for r, v in enumerate(self.anon_ids):
                c, p = self.row(r)
                t = int(self.true_aux[r])
                fh.write(json.dumps({
                    "anon_id": int(v),
                    "true_aux_id": t if t >= 0 else None,
                    "candidates": [[int(a), float(b)] for a, b in zip(c, p)],
                }) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path, total_nodes: int, aux_nodes: int,
                   chunk_size_used: int | None = None) -> AdversaryEstimate:
        rows, truth = {}, {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                v = rec["anon_id"]
                cands = rec["candidates"]
                rows[v] = ([c for c, _ in cands], [p for _, p in cands])
                if rec.get("true_aux_id") is not None:
                    truth[v] = rec["true_aux_id"]
        return cls.from_rows(rows, truth, total_nodes, aux_nodes, chunk_size_used)


def normalize_scores(
    raw: Mapping[int, tuple[Iterable[int], Iterable[float]]],
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Turn candidate scores into probabilities (score / sum of scores).

    Zero-score candidates are dropped; nodes whose scores are all zero are
    left out, i.e. treated as not attempted.
    """
    out = {}
    for v, (c, s) in raw.items():
        c = np.asarray(list(c), dtype=np.int64)
        s = np.asarray(list(s), dtype=np.float64)
        if np.any(~np.isfinite(s)):
            raise ValueError(f"non-finite score for node {v}")
        if np.any(s < 0):
            raise ValueError(f"negative score for node {v}")
        keep = s > 0
        if not keep.any():
            continue
        out[v] = (c[keep], s[keep] / s[keep].sum())
    return out
