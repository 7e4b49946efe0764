from .sampler import (
    CompletionRequest,
    GenerationResult,
    ModelBundle,
    NodePrefix,
    PipelineError,
    SamplerConfig,
    autocomplete,
    generate_graph,
    masked_distribution,
    masked_sample,
    sample_edges,
    sample_nodes,
    sample_params,
)

__all__ = [
    "CompletionRequest",
    "GenerationResult",
    "ModelBundle",
    "NodePrefix",
    "PipelineError",
    "SamplerConfig",
    "autocomplete",
    "generate_graph",
    "masked_distribution",
    "masked_sample",
    "sample_edges",
    "sample_nodes",
    "sample_params",
]
