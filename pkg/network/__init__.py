"""
Network - SampleNet MLP, Gaussian baseline head, Adam and the training loop
"""

from .model import (
    MlpConfig,
    SampleNetModel,
    VAR_FLOOR,
    forward_gaussian,
    forward_samples,
    load_checkpoint,
    save_checkpoint,
)
from .optimizer import AdamState, adam_step
from .trainer import TrainingHistory, TrainSchedule, combined_loss, train, training_loss, validation_score

__all__ = [
    "AdamState",
    "MlpConfig",
    "SampleNetModel",
    "TrainSchedule",
    "TrainingHistory",
    "VAR_FLOOR",
    "adam_step",
    "combined_loss",
    "forward_gaussian",
    "forward_samples",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "training_loss",
    "validation_score",
]
