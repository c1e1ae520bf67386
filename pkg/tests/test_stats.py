import itertools

import numpy as np
import pytest
from scipy import stats as sps

from graphprivacy.stats import cvm_statistic, cvm_uniform, mean_ci, rank_sum_test, welch_t_test


def enum_rank_sum_p(a, b):
    """Two-sided exact p by listing every split of the pooled sample."""
    pooled = np.concatenate([a, b])
    ranks = sps.rankdata(pooled)
    n_a = len(a)
    mu = n_a * (len(pooled) + 1) / 2
    obs = abs(ranks[:n_a].sum() - mu)
    sums = [abs(ranks[list(c)].sum() - mu) for c in itertools.combinations(range(len(pooled)), n_a)]
    return sum(s >= obs - 1e-9 for s in sums) / len(sums)


def test_welch_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.normal(0, rng.uniform(0.1, 3), rng.integers(2, 30))
        b = rng.normal(rng.normal(), rng.uniform(0.1, 3), rng.integers(2, 30))
        got = welch_t_test(a, b)
        want = sps.ttest_ind(a, b, equal_var=False).pvalue
        assert got.p_value == pytest.approx(want, abs=1e-6)
        assert got.mean_diff_sign == np.sign(b.mean() - a.mean())


def test_welch_degenerate():
    assert welch_t_test([1, 1], [1, 1]).p_value == 1.0
    out = welch_t_test([1, 1], [2, 2])
    assert out.p_value == 0.0 and out.significant and out.mean_diff_sign == 1


def test_rank_sum_hand_value():
    out = rank_sum_test([1, 2], [3, 4])
    assert out.p_value == pytest.approx(1 / 3, abs=1e-12)
    assert not out.significant


def test_rank_sum_exact_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n_a, n_b = rng.integers(2, 7, size=2)
        a = rng.integers(0, 6, n_a).astype(float)
        b = rng.integers(0, 6, n_b).astype(float)
        assert rank_sum_test(a, b).p_value == pytest.approx(enum_rank_sum_p(a, b), abs=1e-12)


def test_rank_sum_exact_matches_scipy_without_ties():
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.permutation(12)[: rng.integers(4, 13)].astype(float)
        k = rng.integers(2, len(x) - 1)
        a, b = x[:k], x[k:]
        want = sps.mannwhitneyu(a, b, alternative="two-sided", method="exact").pvalue
        assert rank_sum_test(a, b).p_value == pytest.approx(want, abs=1e-12)


def test_rank_sum_normal_matches_scipy():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = rng.integers(0, 20, rng.integers(7, 60)).astype(float)
        b = rng.integers(0, 20, rng.integers(7, 60)).astype(float) + rng.integers(0, 4)
        want = sps.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
        assert rank_sum_test(a, b).p_value == pytest.approx(want, abs=1e-9)


def test_rank_sum_all_tied():
    assert rank_sum_test(np.ones(20), np.ones(20)).p_value == 1.0


def test_small_sample_rejected():
    with pytest.raises(ValueError):
        welch_t_test([1], [1, 2])
    with pytest.raises(ValueError):
        rank_sum_test([1, 2], [3])


def test_cvm_perfect_grid():
    for n in (1, 5, 50, 1000):
        grid = (2 * np.arange(1, n + 1) - 1) / (2 * n)
        assert cvm_statistic(grid) == pytest.approx(1 / (12 * n), abs=1e-12)
        assert cvm_uniform(grid) == pytest.approx(1 / (12 * n * n), abs=1e-12)


def test_cvm_matches_scipy():
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.beta(rng.uniform(0.3, 3), rng.uniform(0.3, 3), rng.integers(2, 200))
        want = sps.cramervonmises(x, "uniform").statistic
        assert cvm_statistic(x) == pytest.approx(want, rel=1e-10)


def test_cvm_domain():
    with pytest.raises(ValueError):
        cvm_statistic([0.5, 1.5])


def test_mean_ci_matches_scipy():
    x = np.random.default_rng(5).normal(3, 2, 40)
    m, hw = mean_ci(x, 0.95)
    lo, hi = sps.t.interval(0.95, len(x) - 1, loc=x.mean(), scale=sps.sem(x))
    assert m == pytest.approx(x.mean())
    assert hw == pytest.approx((hi - lo) / 2)
    assert mean_ci([2, 2, 2]) == (2.0, 0.0)
