from . import autodiff
from .autodiff import Tensor
from .adam import AdamState, adam_step
from .model import (
    ForwardOutput,
    TransformerConfig,
    encode_at,
    forward,
    init_weights,
    pointer_distribution,
    pointer_logits_array,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .stages import STAGES, StageConfigs, featurize, stage_configs
from .training import (
    StageModel,
    TrainResult,
    TrainSettings,
    TrainingError,
    evaluate_loss,
    load_stage_model,
    load_training_state,
    save_stage_model,
    train_stage,
)

__all__ = [
    "autodiff",
    "Tensor",
    "AdamState",
    "adam_step",
    "ForwardOutput",
    "TransformerConfig",
    "encode_at",
    "forward",
    "init_weights",
    "pointer_distribution",
    "pointer_logits_array",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "STAGES",
    "StageConfigs",
    "featurize",
    "stage_configs",
    "StageModel",
    "TrainResult",
    "TrainSettings",
    "TrainingError",
    "evaluate_loss",
    "load_stage_model",
    "load_training_state",
    "save_stage_model",
    "train_stage",
]
