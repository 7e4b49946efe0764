from .emd import emd_1d, normalize_counts
from .ged import EXACT_CUTOFF, GedResult, graph_edit_distance
from .stats import (
    GraphCorpusStats,
    compare_stats,
    graph_stats_distance,
    graph_statistics,
)
from .distances import (
    EDIT_METRIC_MIN_NODES,
    MetricError,
    MetricReport,
    NearestNeighborReport,
    evaluate_corpora,
    frechet_distance,
    nearest_neighbor_distance,
    render_features,
    render_stat_distance,
)

__all__ = [
    "emd_1d",
    "normalize_counts",
    "EXACT_CUTOFF",
    "GedResult",
    "graph_edit_distance",
    "GraphCorpusStats",
    "compare_stats",
    "graph_stats_distance",
    "graph_statistics",
    "EDIT_METRIC_MIN_NODES",
    "MetricError",
    "MetricReport",
    "NearestNeighborReport",
    "evaluate_corpora",
    "frechet_distance",
    "nearest_neighbor_distance",
    "render_features",
    "render_stat_distance",
]
