"""Two-sample tests, the Cramér–von Mises uniformity statistic and mean CIs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

__all__ = [
    "TestOutcome",
    "welch_t_test",
    "rank_sum_test",
    "cvm_statistic",
    "cvm_uniform",
    "mean_ci",
    "EXACT_RANK_SUM_LIMIT",
]

EXACT_RANK_SUM_LIMIT = 12


@dataclass(frozen=True)
class TestOutcome:
    p_value: float
    mean_diff_sign: int  # sign of mean(b) - mean(a)
    significant: bool

    __test__ = False  # not a pytest class


def _check(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 observations")
    return a, b


def _sign(a: np.ndarray, b: np.ndarray) -> int:
    d = b.mean() - a.mean()
    return int(np.sign(d)) if d != 0 else 0


def welch_t_test(a, b, alpha: float = 0.05) -> TestOutcome:
    """Two-sided Welch t-test with Welch–Satterthwaite degrees of freedom."""
    a, b = _check(a, b)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    diff = b.mean() - a.mean()
    se2 = va + vb
    if se2 == 0:
        p = 1.0 if diff == 0 else 0.0
    else:
        t = diff / math.sqrt(se2)
        df = se2 ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
        p = float(2 * sps.t.sf(abs(t), df))
    p = min(max(p, 0.0), 1.0)
    return TestOutcome(p, _sign(a, b), p < alpha)


def _exact_rank_sum_p(ranks: np.ndarray, n_a: int) -> float:
    """Two-sided exact p by enumerating every assignment of ranks to sample a."""
    n = len(ranks)
    observed = ranks[:n_a].sum()
    expected = n_a * (n + 1) / 2
    dev = abs(observed - expected)
    total = hits = 0
    for combo in itertools.combinations(range(n), n_a):
        total += 1
        if abs(ranks[list(combo)].sum() - expected) >= dev - 1e-9:
            hits += 1
    return hits / total


def rank_sum_test(a, b, alpha: float = 0.05, exact: bool | None = None) -> TestOutcome:
    """Two-sided Wilcoxon–Mann–Whitney rank-sum test.

    Exact enumeration (over mid-ranks) when ``|a|+|b| <= 12``, otherwise the
    normal approximation with tie and continuity corrections.
    """
    a, b = _check(a, b)
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    pooled = np.concatenate([a, b])
    ranks = sps.rankdata(pooled)
    if exact is None:
        exact = n <= EXACT_RANK_SUM_LIMIT
    if exact:
        p = _exact_rank_sum_p(ranks, n_a)
    else:
        w = ranks[:n_a].sum()
        mu = n_a * (n + 1) / 2
        _, counts = np.unique(pooled, return_counts=True)
        tie = float(np.sum(counts ** 3 - counts))
        var = n_a * n_b / 12 * ((n + 1) - tie / (n * (n - 1)))
        if var <= 0:
            p = 1.0
        else:
            z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
            p = float(2 * sps.norm.sf(z))
    p = min(max(p, 0.0), 1.0)
    return TestOutcome(p, _sign(a, b), p < alpha)


def cvm_statistic(values) -> float:
    """Cramér–von Mises ``T = 1/(12n) + sum(((2i-1)/(2n) - x_(i))^2)`` against U(0,1)."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = len(x)
    if n < 1:
        raise ValueError("need at least one value")
    if np.any((x < 0) | (x > 1)):
        raise ValueError("values must lie in [0, 1]")
    grid = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    return float(1 / (12 * n) + np.sum((grid - x) ** 2))


def cvm_uniform(values) -> float:
    """Cramér–von Mises statistic divided by the number of values."""
    return cvm_statistic(values) / len(values)


def mean_ci(values, confidence: float = 0.95) -> tuple[float, float]:
    """Student-t confidence interval: ``(mean, half_width)``."""
    x = np.asarray(values, dtype=np.float64)
    if len(x) < 2:
        raise ValueError("need at least 2 values")
    sd = x.std(ddof=1)
    if sd == 0:
        return float(x.mean()), 0.0
    q = sps.t.ppf(0.5 + confidence / 2, len(x) - 1)
    return float(x.mean()), float(q * sd / math.sqrt(len(x)))

