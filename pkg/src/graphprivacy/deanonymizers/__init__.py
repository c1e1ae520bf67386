"""Seed-based de-anonymization attacks.

Every attack takes :class:`AuxiliaryKnowledge` and returns an
:class:`~graphprivacy.estimate.AdversaryEstimate` whose rows are the
attack's candidate scores normalized to probabilities. Seed nodes are
known to the adversary and never appear as rows.
"""
from __future__ import annotations

from ..estimate import AdversaryEstimate, normalize_scores
from ._base import (
    CHUNKED,
    DEANONYMIZERS,
    LOCAL,
    AuxiliaryKnowledge,
    DeanonConfig,
    chunk_partition,
    distance_similarity,
    greedy_assignment,
    make_knowledge,
    seed_distance_vectors,
)
from .local import deanon_kl, deanon_ns, deanon_yg
from .structural import deanon_ada, deanon_dv, deanon_jlsb

_DISPATCH = {
    "NS": deanon_ns,
    "KL": deanon_kl,
    "YG": deanon_yg,
    "DV": deanon_dv,
    "JLSB": deanon_jlsb,
    "ADA": deanon_ada,
}


def deanonymize(k: AuxiliaryKnowledge, cfg: DeanonConfig) -> AdversaryEstimate:
    return _DISPATCH[cfg.kind](k, cfg)


__all__ = [
    "AdversaryEstimate",
    "AuxiliaryKnowledge",
    "CHUNKED",
    "DEANONYMIZERS",
    "DeanonConfig",
    "LOCAL",
    "chunk_partition",
    "deanon_ada",
    "deanon_dv",
    "deanon_jlsb",
    "deanon_kl",
    "deanon_ns",
    "deanon_yg",
    "deanonymize",
    "distance_similarity",
    "greedy_assignment",
    "make_knowledge",
    "normalize_scores",
    "seed_distance_vectors",
]
