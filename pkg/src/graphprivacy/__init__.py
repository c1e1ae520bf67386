"""Graph anonymization, seed-based de-anonymization and privacy-metric strength evaluation."""
from .anonymizers import AnonymizerConfig, anonymize
from .deanonymizers import AuxiliaryKnowledge, DeanonConfig, deanonymize, make_knowledge
from .estimate import AdversaryEstimate, normalize_scores
from .graph import (
    Graph,
    GraphStats,
    NodeMapping,
    compute_graph_stats,
    largest_connected_component,
    load_edge_list,
    permute_node_ids,
    sample_auxiliary,
)
from .metrics import METRIC_NAMES, REGISTRY, MetricParams, evaluate_all
from .strength import ScenarioSeries, evenness_score, monotonicity_score, shared_range_score
from .suites import PRESETS, AlternativeMatrix, SuiteSpec, search_suites, suite_monotonic_fraction, wpm_scores

__version__ = "0.1.0"
