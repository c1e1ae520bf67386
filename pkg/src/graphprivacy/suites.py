"""Weighted Product Model aggregation of privacy metrics into suites."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .metrics import REGISTRY

__all__ = [
    "SuiteSpec",
    "AlternativeMatrix",
    "PRESETS",
    "wpm_normalize",
    "wpm_scores",
    "suite_monotonic_fraction",
    "search_suites",
    "MAX_SEARCH_CANDIDATES",
]

MAX_SEARCH_CANDIDATES = 12


@dataclass(frozen=True)
class SuiteSpec:
    members: tuple[tuple[str, float], ...]
    name: str = ""

    def __post_init__(self):
        if not self.members:
            raise ValueError("a suite needs at least one metric")
        names = [m for m, _ in self.members]
        if len(set(names)) != len(names):
            raise ValueError("duplicate metric in suite")
        for m, w in self.members:
            if m not in REGISTRY:
                raise ValueError(f"unknown metric {m!r}")
            if w <= 0:
                raise ValueError("weights must be positive")
        if abs(sum(w for _, w in self.members) - 1) > 1e-9:
            raise ValueError("weights must sum to 1")

    @classmethod
    def equal(cls, metrics: Iterable[str], name: str = "") -> SuiteSpec:
        metrics = list(metrics)
        return cls(tuple((m, 1 / len(metrics)) for m in metrics), name)

    @property
    def metrics(self) -> list[str]:
        return [m for m, _ in self.members]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.members])

    def label(self) -> str:
        return self.name or "+".join(self.metrics)


PRESETS: dict[str, SuiteSpec] = {
    "S1": SuiteSpec.equal(["adversary_overall_success"], "S1"),
    "S2": SuiteSpec.equal(["adversary_overall_success", "normalized_variance"], "S2"),
    "S3": SuiteSpec.equal(
        ["pearson_correlation", "adversary_overall_success", "normalized_variance",
         "amount_leaked_information"], "S3"),
    "S4": SuiteSpec((
        ("pearson_correlation", 0.1), ("adversary_overall_success", 0.35),
        ("normalized_variance", 0.1), ("amount_leaked_information", 0.35),
        ("incorrectness", 0.1)), "S4"),
    "S5": SuiteSpec((
        ("pearson_correlation", 0.1), ("normalized_variance", 0.1), ("incorrectness", 0.1),
        ("amount_leaked_information", 0.25), ("adversary_success_rate", 0.1),
        ("adversary_overall_success", 0.25), ("absolute_error", 0.1)), "S5"),
}


@dataclass(frozen=True)
class AlternativeMatrix:
    """Mean metric values ``x[i, j]`` for alternative ``i`` and metric ``j``."""

    alternatives: tuple
    metrics: tuple[str, ...]
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.shape != (len(self.alternatives), len(self.metrics)):
            raise ValueError("matrix shape does not match alternatives x metrics")
        if len(self.alternatives) < 1:
            raise ValueError("need at least one alternative")
        if not np.all(np.isfinite(x)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "x", x)

    def column(self, metric: str) -> np.ndarray:
        return self.x[:, self.metrics.index(metric)]

    def drop(self, i: int) -> AlternativeMatrix:
        keep = [k for k in range(len(self.alternatives)) if k != i]
        return AlternativeMatrix(tuple(self.alternatives[k] for k in keep), self.metrics, self.x[keep])


def wpm_normalize(col: np.ndarray, higher_better: bool) -> np.ndarray:
    """``x/max`` (higher-better) or ``min/x`` (lower-better) after an epsilon floor
    that shifts columns containing non-positive values."""
    col = np.asarray(col, dtype=np.float64)
    if np.all(col == 0):
        raise ValueError("all-zero metric column")
    if col.min() <= 0:
        eps = 1e-9 * max(1.0, float(np.abs(col).max()))
        col = col - col.min() + eps
    return col / col.max() if higher_better else col.min() / col


def wpm_scores(m: AlternativeMatrix, suite: SuiteSpec, zero_columns: str = "raise") -> np.ndarray:
    """``Q_i = prod_j xbar_ij ** w_j`` for every alternative.

    ``zero_columns="neutral"`` lets an all-zero column contribute a factor
    of 1 instead of raising.
    """
    missing = [k for k in suite.metrics if k not in m.metrics]
    if missing:
        raise ValueError(f"metrics missing from matrix: {missing}")
    logq = np.zeros(len(m.alternatives))
    for name, w in suite.members:
        col = m.column(name)
        if zero_columns == "neutral" and np.all(col == 0):
            continue
        logq += w * np.log(wpm_normalize(col, REGISTRY[name].higher_better))
    return np.exp(logq)


def suite_monotonic_fraction(
    matrices: Sequence[AlternativeMatrix], suite: SuiteSpec
) -> tuple[float, float]:
    """(fraction of correctly ordered adjacent pairs, % of fully monotonic scenarios).

    Alternatives must be ordered by ascending adversary strength; a pair is
    correct only if privacy strictly drops (``Q_i > Q_{i+1}``).
    """
    correct = total = mono = 0
    for m in matrices:
        if len(m.alternatives) < 2:
            raise ValueError("need at least 2 alternatives per scenario")
        q = wpm_scores(m, suite, zero_columns="neutral")
        ok = q[:-1] > q[1:]
        correct += int(ok.sum())
        total += len(ok)
        mono += bool(ok.all())
    if not matrices:
        return 0.0, 0.0
    return correct / total, 100.0 * mono / len(matrices)


def search_suites(
    candidates: Sequence[str],
    matrices: Sequence[AlternativeMatrix],
    weight_vectors: Iterable[tuple[Sequence[str], Sequence[float]]] = (),
) -> list[tuple[SuiteSpec, float, float]]:
    """Score every non-empty equal-weight subset of ``candidates``.

    Extra ``(metrics, weights)`` suites can be supplied. Results are sorted
    by % monotonic scenarios, then pair fraction, then fewer members.
    """
    candidates = list(dict.fromkeys(candidates))
    if len(candidates) > MAX_SEARCH_CANDIDATES:
        raise ValueError(f"at most {MAX_SEARCH_CANDIDATES} candidates (2^n subsets)")
    suites = [
        SuiteSpec.equal(combo)
        for r in range(1, len(candidates) + 1)
        for combo in itertools.combinations(candidates, r)
    ]
    for names, weights in weight_vectors:
        suites.append(SuiteSpec(tuple(zip(names, weights))))
    scored = [(s, *suite_monotonic_fraction(matrices, s)) for s in suites]
    scored.sort(key=lambda t: (-t[2], -t[1], len(t[0].members)))
    return scored
