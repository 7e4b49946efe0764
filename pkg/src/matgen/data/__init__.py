from .forge import (
    overfit_corpus,
    synthesize_overfit_graph,
    CorpusSample,
    CorpusSpec,
    FilterThresholds,
    augment,
    build_corpus,
    filter_corpus,
    split_corpus,
    synthesize_base_graphs,
    synthesize_graph,
)

__all__ = [
    "overfit_corpus",
    "synthesize_overfit_graph",
    "CorpusSample",
    "CorpusSpec",
    "FilterThresholds",
    "augment",
    "build_corpus",
    "filter_corpus",
    "split_corpus",
    "synthesize_base_graphs",
    "synthesize_graph",
]
