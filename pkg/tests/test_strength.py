import itertools
import re

import numpy as np
import pytest
from scipy import stats as sps

from graphprivacy import REGISTRY, ScenarioSeries, evenness_score, monotonicity_score, shared_range_score
from graphprivacy.strength import normalize_raw, raw_monotonicity

from test_stats import enum_rank_sum_p

HI = REGISTRY["entropy"]  # higher is better
LO = REGISTRY["adversary_overall_success"]  # lower is better


def pattern_table(pairs):
    """Raw score of every E/W/0 pattern, by string matching."""
    table = {}
    for pat in itertools.product("EW0", repeat=pairs):
        s = "".join(pat)
        peaks = len(re.findall(r"(?=(EW|WE))", s))
        table[s] = s.count("E") - s.count("W") - 2 * peaks
    return table


def oracle_score(levels, higher_better, alpha=0.05):
    pairs = len(levels) - 1
    table = pattern_table(pairs)
    scores = []
    for test in ("welch", "rank"):
        pat = ""
        for a, b in zip(levels, levels[1:]):
            if test == "welch":
                p = sps.ttest_ind(a, b, equal_var=False).pvalue
                if np.isnan(p):
                    p = 1.0 if a.mean() == b.mean() else 0.0
            elif len(a) + len(b) <= 12:
                p = enum_rank_sum_p(a, b)
            else:
                p = sps.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic").pvalue
            d = b.mean() - a.mean()
            if p >= alpha or d == 0:
                pat += "0"
            else:
                dropped = d < 0
                pat += "E" if dropped == higher_better else "W"
        raw = table[pat]
        scores.append(min(1, max(0, (raw + pairs) / (2 * pairs))))
    return sum(scores) / 2


def series(levels, desc=HI):
    return ScenarioSeries(("s",), desc, tuple(levels))


@pytest.mark.filterwarnings("ignore:Precision loss")
def test_matches_oracle_on_random_series():
    rng = np.random.default_rng(0)
    for i in range(200):
        n_lv = int(rng.integers(2, 7))
        reps = int(rng.integers(2, 25))
        means = np.cumsum(rng.normal(0, 1, n_lv))
        levels = [rng.normal(m, rng.uniform(0.2, 2), reps) for m in means]
        if i % 5 == 0:
            levels = [np.round(x) for x in levels]  # ties
        desc = HI if i % 2 else LO
        assert monotonicity_score(series(levels, desc)) == pytest.approx(oracle_score(levels, desc.higher_better),
                                                                         abs=1e-12)


def test_perfect_and_reversed():
    dec = [np.array([10.0, 10.1, 10.2, 10.05, 9.95]) - 3 * i for i in range(6)]
    assert monotonicity_score(series(dec, HI)) == 1.0
    assert monotonicity_score(series(dec[::-1], HI)) == 0.0
    assert monotonicity_score(series(dec[::-1], LO)) == 1.0


def test_flat_series_is_half():
    flat = [np.array([1.0, 2.0, 3.0])] * 4
    assert monotonicity_score(series(flat)) == 0.5


def test_peak_penalty_and_clip():
    assert raw_monotonicity([1, -1, 1], [-1, 1, -1]) == 1 - 4
    assert raw_monotonicity([1, 0, -1], [-1, 0, 1]) == 0
    assert normalize_raw(-5, 3) == 0.0
    assert normalize_raw(3, 3) == 1.0


def test_series_validation():
    with pytest.raises(ValueError):
        series([np.ones(3)])
    with pytest.raises(ValueError):
        series([np.ones(3), np.ones(1)])


def test_evenness():
    assert evenness_score(np.full(10, 4.2)) == 0.0
    grid = (2 * np.arange(1, 101) - 1) / 200
    assert evenness_score(grid) > 0.99
    assert evenness_score(np.r_[np.zeros(99), 1.0]) == 0.0
    # affine invariance from the min-max step
    x = np.random.default_rng(1).random(50)
    assert evenness_score(x) == pytest.approx(evenness_score(7 * x - 3))


def test_shared_range():
    out = shared_range_score({"a": (0, 5), "b": (2, 10), "c": (4, 4)})
    assert out == {"a": 0.5, "b": 0.8, "c": 0.0}
    assert shared_range_score({"a": (3, 3), "b": (3, 3)}) == {"a": 1.0, "b": 1.0}
