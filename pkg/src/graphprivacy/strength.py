"""Metric strength criteria: monotonicity, evenness and shared value range."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .metrics import MetricDescriptor
from .stats import cvm_statistic, rank_sum_test, welch_t_test

__all__ = [
    "ScenarioSeries",
    "StrengthScores",
    "pair_contributions",
    "raw_monotonicity",
    "normalize_raw",
    "monotonicity_score",
    "evenness_score",
    "shared_range_score",
    "TESTS",
]

TESTS = {"welch": welch_t_test, "rank_sum": rank_sum_test}


@dataclass(frozen=True)
class ScenarioSeries:
    """Replicated per-graph values of one metric at each adversary strength.

    ``levels`` are ordered by ascending adversary strength.
    """

    scenario_id: tuple
    metric: MetricDescriptor
    levels: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        levels = tuple(np.asarray(x, dtype=np.float64) for x in self.levels)
        if len(levels) < 2:
            raise ValueError("a series needs at least 2 strength levels")
        if any(len(x) < 2 for x in levels):
            raise ValueError("every level needs at least 2 replications")
        object.__setattr__(self, "levels", levels)


@dataclass(frozen=True)
class StrengthScores:
    monotonicity: float
    evenness: float
    shared_range: float


def pair_contributions(series: ScenarioSeries, test: str, alpha: float = 0.05):
    """Per adjacent pair: (+1 expected / -1 wrong / 0 insignificant, mean-diff sign)."""
    expected = -1 if series.metric.higher_better else 1
    fn = TESTS[test]
    contrib, signs = [], []
    for a, b in zip(series.levels[:-1], series.levels[1:]):
        out = fn(a, b, alpha)
        s = out.mean_diff_sign if out.significant else 0
        contrib.append(0 if s == 0 else (1 if s == expected else -1))
        signs.append(s)
    return contrib, signs


def raw_monotonicity(contrib: Sequence[int], signs: Sequence[int]) -> int:
    """Sum of contributions, minus 2 per direction change between consecutive significant pairs."""
    raw = int(sum(contrib))
    for i in range(len(contrib) - 1):
        if contrib[i] and contrib[i + 1] and signs[i] != signs[i + 1]:
            raw -= 2
    return raw


def normalize_raw(raw: int, pairs: int) -> float:
    """Map ``[-P, P]`` linearly onto ``[0, 1]``; peak penalties below ``-P`` clip to 0."""
    return float(min(1.0, max(0.0, (raw + pairs) / (2 * pairs))))


def monotonicity_score(series: ScenarioSeries, alpha: float = 0.05) -> float:
    """Mean over the t-test and rank-sum test of the normalized raw score."""
    pairs = len(series.levels) - 1
    scores = [normalize_raw(raw_monotonicity(*pair_contributions(series, t, alpha)), pairs) for t in TESTS]
    return float(np.mean(scores))


def evenness_score(values) -> float:
    """``max(0, 1 - 3*T)`` with ``T`` the Cramér–von Mises statistic of the
    min-max normalized values; identical values score 0."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if len(x) < 2:
        raise ValueError("need at least 2 values")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return 0.0
    x = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return float(max(0.0, 1.0 - 3.0 * cvm_statistic(x)))


def shared_range_score(ranges: Mapping[object, tuple[float, float]]) -> dict[object, float]:
    """Fraction of the global value range each scenario covers."""
    if not ranges:
        return {}
    lo = min(r[0] for r in ranges.values())
    hi = max(r[1] for r in ranges.values())
    if hi == lo:
        return {k: 1.0 for k in ranges}
    return {k: float((r[1] - r[0]) / (hi - lo)) for k, r in ranges.items()}
