"""The 26 graph privacy metrics, computed from an :class:`AdversaryEstimate`.

Per-node notation used below: ``p`` is a node's candidate distribution,
``p_t`` the probability on its true aux node (0 if absent), ``y`` the
indicator of the true node over the candidates, ``n`` the number of
candidates. ``N`` is the anonymized graph's node count, ``A`` the number of
attempted nodes and ``C`` the number of nodes whose argmax is correct.
Where ``p_t = 0`` makes a logarithm infinite, the value is replaced by
``log2(|V_aux|)``, the entropy of a blind guess over the auxiliary graph.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .estimate import AdversaryEstimate

__all__ = [
    "MetricDescriptor",
    "MetricResult",
    "REGISTRY",
    "METRIC_NAMES",
    "HIGHER",
    "LOWER",
    "MetricParams",
    "uncertainty_metrics",
    "gain_metrics",
    "error_metrics",
    "similarity_metrics",
    "success_metrics",
    "evaluate_all",
    "per_graph_values",
]

HIGHER = "higher_better"
LOWER = "lower_better"


@dataclass(frozen=True)
class MetricDescriptor:
    name: str
    category: str
    direction: str
    level: str
    needs_truth: bool
    chunk_sensitive: bool
    title: str

    @property
    def higher_better(self) -> bool:
        return self.direction == HIGHER

    @property
    def per_graph(self) -> bool:
        return self.level == "per_graph"


def _d(name, cat, hl, per_graph, truth, chunk, title):
    return MetricDescriptor(name, cat, HIGHER if hl == "H" else LOWER,
                            "per_graph" if per_graph else "per_node", truth, chunk, title)


# Direction, level and flags follow the published metric table row by row.
_ROWS = [
    _d("anonymity_set_size", "uncertainty", "H", False, False, True, "Anonymity set size"),
    _d("collision_entropy", "uncertainty", "H", False, False, True, "Collision entropy"),
    _d("conditional_entropy", "uncertainty", "H", False, True, False, "Conditional entropy"),
    _d("conditional_privacy", "uncertainty", "H", False, True, False, "Conditional privacy"),
    _d("entropy", "uncertainty", "H", False, False, True, "Entropy"),
    _d("inherent_privacy", "uncertainty", "H", False, False, True, "Inherent privacy"),
    _d("max_entropy", "uncertainty", "H", False, False, True, "Max-entropy"),
    _d("min_entropy", "uncertainty", "H", False, False, True, "Min-entropy"),
    _d("normalized_entropy", "uncertainty", "H", False, False, False, "Normalized entropy"),
    _d("quantiles_on_entropy", "uncertainty", "H", False, False, True, "Quantiles on entropy"),
    _d("amount_leaked_information", "gain", "L", True, True, False, "Amount leaked information"),
    _d("conditional_privacy_loss", "gain", "L", True, True, True, "Conditional privacy loss"),
    _d("information_surprisal", "gain", "L", False, True, False, "Information surprisal"),
    _d("loss_of_anonymity", "gain", "L", True, True, True, "Loss of anonymity"),
    _d("mutual_information", "gain", "L", False, True, True, "Mutual information"),
    _d("pearson_correlation", "gain", "L", False, True, False, "Pearson correlation"),
    _d("relative_entropy", "gain", "H", False, True, False, "Relative entropy"),
    _d("absolute_error", "error", "H", False, True, False, "Absolute error"),
    _d("incorrectness", "error", "H", False, True, False, "Incorrectness"),
    _d("mean_squared_error", "error", "H", False, True, False, "Mean squared error"),
    _d("percent_incorrectly_classified", "error", "H", True, True, False, "% incorrectly classified"),
    _d("normalized_variance", "similarity", "H", False, True, False, "Normalized variance"),
    _d("adversary_success_rate", "success", "L", True, True, False, "Adversary's success rate"),
    _d("adversary_overall_success", "success", "L", True, True, False, "Adversary's overall success"),
    _d("hiding_property", "success", "H", True, False, False, "Hiding property"),
    _d("user_specified_innocence", "success", "H", True, False, False, "User-specified innocence"),
]

REGISTRY: dict[str, MetricDescriptor] = {d.name: d for d in _ROWS}
METRIC_NAMES: tuple[str, ...] = tuple(REGISTRY)


@dataclass(frozen=True)
class MetricResult:
    """One metric's value(s) for one estimate.

    ``per_node`` is aligned with ``AdversaryEstimate.anon_ids`` and is
    ``None`` for per-graph metrics. ``per_graph`` is the scalar (for
    per-node metrics: the mean over attempted nodes, 0 when none were).
    """

    descriptor: MetricDescriptor
    per_graph: float
    per_node: np.ndarray | None = None


@dataclass(frozen=True)
class MetricParams:
    quantile_cutoffs: tuple[float, ...] = (0.01,)
    tau_hiding: float = 0.5
    tau_innocence: float = 0.5

    def __post_init__(self):
        for t in (self.tau_hiding, self.tau_innocence):
            if not 0 < t <= 1:
                raise ValueError("thresholds must lie in (0, 1]")
        if not self.quantile_cutoffs:
            raise ValueError("at least one quantile cutoff is required")


# ----------------------------------------------------------------------------- helpers


class _Rows:
    """Vectorized per-row reductions over an estimate's flat storage."""

    def __init__(self, e: AdversaryEstimate):
        self.e = e
        self.n = e.row_sizes.astype(np.float64)
        self.idx = e.row_index
        self.starts = e.row_ptr[:-1]
        self.p = e.prob
        self.y = e.truth_mask.astype(np.float64)
        self.cap = float(np.log2(max(e.aux_nodes, 2)))

    def sum(self, x: np.ndarray) -> np.ndarray:
        if len(self.starts) == 0:
            return np.empty(0)
        return np.add.reduceat(x, self.starts)

    def max(self, x: np.ndarray) -> np.ndarray:
        if len(self.starts) == 0:
            return np.empty(0)
        return np.maximum.reduceat(x, self.starts)

    def per_row(self, x: np.ndarray) -> np.ndarray:
        return x[self.idx]

    @property
    def p_true(self) -> np.ndarray:
        return self.sum(self.p * self.y)

    @property
    def p_max(self) -> np.ndarray:
        return self.max(self.p)

    def entropy(self, p=None) -> np.ndarray:
        p = self.p if p is None else p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return self.sum(t)

    def correct(self) -> np.ndarray:
        """Whether each row's argmax (lowest id on ties) is the true node."""
        e = self.e
        if e.attempted_count == 0:
            return np.zeros(0, dtype=bool)
        order = np.lexsort((e.cand, -self.p, self.idx))
        first = order[self.starts]  # starts are preserved since idx is the primary key
        return e.cand[first] == e.true_aux


def _mean(x: np.ndarray) -> float:
    return float(x.mean()) if len(x) else 0.0


def _node(name: str, values: np.ndarray) -> MetricResult:
    values = np.asarray(values, dtype=np.float64)
    return MetricResult(REGISTRY[name], _mean(values), values)


def _graph(name: str, value: float) -> MetricResult:
    return MetricResult(REGISTRY[name], float(value), None)


# ----------------------------------------------------------------------------- categories


def _conditional_entropy(r: _Rows, h1: np.ndarray) -> np.ndarray:
    return np.where(r.p_true > 0, h1, r.cap)


def quantile_entropy(r: _Rows, tau: float) -> np.ndarray:
    """Shannon entropy after dropping ``p < tau`` and renormalizing (0 if nothing survives)."""
    keep = r.p >= tau
    q = np.where(keep, r.p, 0.0)
    tot = r.sum(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        qn = np.where(keep, q / r.per_row(np.where(tot > 0, tot, 1.0)), 0.0)
    return np.where(tot > 0, r.entropy(qn), 0.0)


def uncertainty_metrics(e: AdversaryEstimate, quantile_cutoffs: Sequence[float] = (0.01,),
                        _r: _Rows | None = None) -> dict[str, MetricResult]:
    """Anonymity set size and the entropy family.

    The first cutoff feeds ``quantiles_on_entropy``; further cutoffs are
    returned as ``quantiles_on_entropy@<tau>``.
    """
    r = _r or _Rows(e)
    ass = r.sum((r.p > 0).astype(np.float64))
    h1 = r.entropy()
    h0 = np.log2(ass)
    with np.errstate(divide="ignore"):
        hinf = -np.log2(r.p_max)
        h2 = -np.log2(r.sum(r.p * r.p))
    # clean -0.0 and round-off above the upper Renyi bound
    hinf, h2, h1 = np.maximum(hinf, 0.0), np.maximum(h2, 0.0), np.maximum(h1, 0.0)
    norm = np.divide(h1, h0, out=np.zeros_like(h1), where=ass > 1)
    ce = _conditional_entropy(r, h1)
    out = {
        "anonymity_set_size": _node("anonymity_set_size", ass),
        "collision_entropy": _node("collision_entropy", h2),
        "conditional_entropy": _node("conditional_entropy", ce),
        "conditional_privacy": _node("conditional_privacy", np.exp2(ce)),
        "entropy": _node("entropy", h1),
        "inherent_privacy": _node("inherent_privacy", np.exp2(h1)),
        "max_entropy": _node("max_entropy", h0),
        "min_entropy": _node("min_entropy", hinf),
        "normalized_entropy": _node("normalized_entropy", norm),
    }
    for i, tau in enumerate(quantile_cutoffs):
        res = _node("quantiles_on_entropy", quantile_entropy(r, tau))
        out["quantiles_on_entropy" if i == 0 else f"quantiles_on_entropy@{tau:g}"] = res
    return out


def _pearson(r: _Rows) -> np.ndarray:
    n = r.n
    mp = r.sum(r.p) / n
    my = r.sum(r.y) / n
    dp = r.p - r.per_row(mp)
    dy = r.y - r.per_row(my)
    cov = r.sum(dp * dy)
    vp = r.sum(dp * dp)
    vy = r.sum(dy * dy)
    denom = np.sqrt(vp * vy)
    tiny = 1e-15
    out = np.divide(cov, denom, out=np.zeros_like(cov), where=(vp > tiny) & (vy > tiny))
    return np.clip(out, -1.0, 1.0)


def gain_metrics(e: AdversaryEstimate, _r: _Rows | None = None) -> dict[str, MetricResult]:
    r = _r or _Rows(e)
    pt = r.p_true
    h1 = np.maximum(r.entropy(), 0.0)
    with np.errstate(divide="ignore"):
        surprisal = np.where(pt > 0, -np.log2(np.where(pt > 0, pt, 1.0)), r.cap)
    mi = np.maximum(0.0, np.log2(r.n) - h1)
    ce = _conditional_entropy(r, h1)
    n_total = e.total_nodes
    cpl = 1.0 - np.exp2(_mean(ce)) / n_total if e.attempted_count else 0.0
    return {
        "amount_leaked_information": _graph("amount_leaked_information", r.correct().sum()),
        "conditional_privacy_loss": _graph("conditional_privacy_loss", cpl),
        "information_surprisal": _node("information_surprisal", surprisal),
        "loss_of_anonymity": _graph("loss_of_anonymity", mi.max() if len(mi) else 0.0),
        "mutual_information": _node("mutual_information", mi),
        "pearson_correlation": _node("pearson_correlation", _pearson(r)),
        "relative_entropy": _node("relative_entropy", surprisal.copy()),
    }


def error_metrics(e: AdversaryEstimate, _r: _Rows | None = None) -> dict[str, MetricResult]:
    r = _r or _Rows(e)
    pt = r.p_true
    mse = r.sum((r.p - r.y) ** 2) / r.n if e.attempted_count else np.empty(0)
    a, c = e.attempted_count, int(r.correct().sum())
    return {
        "absolute_error": _node("absolute_error", r.p_max - pt),
        "incorrectness": _node("incorrectness", 1.0 - pt),
        "mean_squared_error": _node("mean_squared_error", mse),
        "percent_incorrectly_classified": _graph("percent_incorrectly_classified", (a - c) / e.total_nodes),
    }


def similarity_metrics(e: AdversaryEstimate, _r: _Rows | None = None) -> dict[str, MetricResult]:
    """Normalized variance ``Var(y - p) / Var(y)`` (sample variances).

    For a one-hot ``y`` of length ``n`` the denominator is exactly ``1/n``;
    that reference value is also used when the true node is missing from the
    candidates (``y`` all zero). Single-candidate rows give 0.
    """
    r = _r or _Rows(e)
    n = r.n
    d = r.y - r.p
    md = r.sum(d) / n
    ss = r.sum((d - r.per_row(md)) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        var_d = np.where(n > 1, ss / np.maximum(n - 1, 1), 0.0)
        nv = np.where(n > 1, var_d * n, 0.0)
    return {"normalized_variance": _node("normalized_variance", nv)}


def success_metrics(e: AdversaryEstimate, tau_hiding: float = 0.5, tau_innocence: float = 0.5,
                    _r: _Rows | None = None) -> dict[str, MetricResult]:
    for t in (tau_hiding, tau_innocence):
        if not 0 < t <= 1:
            raise ValueError("thresholds must lie in (0, 1]")
    r = _r or _Rows(e)
    big_n, a = e.total_nodes, e.attempted_count
    c = int(r.correct().sum())
    hidden = int(np.sum(r.p_max < tau_hiding)) + (big_n - a)
    innocent = int(np.sum(r.p_true < tau_innocence)) + (big_n - a)
    return {
        "adversary_success_rate": _graph("adversary_success_rate", c / a if a else 0.0),
        "adversary_overall_success": _graph("adversary_overall_success", c / big_n if big_n else 0.0),
        "hiding_property": _graph("hiding_property", hidden),
        "user_specified_innocence": _graph("user_specified_innocence", innocent),
    }


def evaluate_all(e: AdversaryEstimate, params: MetricParams | None = None,
                 extra_quantiles: bool = False) -> dict[str, MetricResult]:
    """All 26 registry metrics (plus extra quantile variants if requested)."""
    params = params or MetricParams()
    r = _Rows(e)
    out: dict[str, MetricResult] = {}
    out.update(uncertainty_metrics(e, params.quantile_cutoffs, _r=r))
    out.update(gain_metrics(e, _r=r))
    out.update(error_metrics(e, _r=r))
    out.update(similarity_metrics(e, _r=r))
    out.update(success_metrics(e, params.tau_hiding, params.tau_innocence, _r=r))
    if not extra_quantiles:
        out = {k: out[k] for k in METRIC_NAMES}
    return out


def per_graph_values(results: Mapping[str, MetricResult]) -> dict[str, float]:
    return {k: v.per_graph for k, v in results.items()}
