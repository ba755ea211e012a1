"""Conditioned U-Net surrogate of the fixed-horizon solution map.

Trains F(X0, c) ~ XM on dataset containers produced by the solver package
and analyzes generalization on the factorial test split.
"""

from .analysis import (
    build_error_matrix,
    correlations,
    grouped_stats,
    huber_mean,
    normalized_huber,
    normalized_residual,
    rank_conditionings,
    torch_predictor,
    tukey_filter,
    write_study,
)
from .config import SurrogateConfig
from .data import CdrReader, DatasetFormatError, FieldPairs, train_val_split
from .model import (
    ConditionedUNet,
    ConditioningMLP,
    Film,
    ResBlock,
    SpatialAttention,
    coord_augment,
)
from .training import (
    cosine_lr,
    huber_loss,
    load_checkpoint,
    make_optimizer,
    predict_batch,
    save_checkpoint,
    train,
    train_step,
)

__version__ = "0.1.0"

__all__ = [
    "CdrReader",
    "ConditionedUNet",
    "ConditioningMLP",
    "DatasetFormatError",
    "FieldPairs",
    "Film",
    "ResBlock",
    "SpatialAttention",
    "SurrogateConfig",
    "build_error_matrix",
    "coord_augment",
    "correlations",
    "cosine_lr",
    "grouped_stats",
    "huber_loss",
    "huber_mean",
    "load_checkpoint",
    "make_optimizer",
    "normalized_huber",
    "normalized_residual",
    "predict_batch",
    "rank_conditionings",
    "save_checkpoint",
    "torch_predictor",
    "train",
    "train_step",
    "train_val_split",
    "tukey_filter",
    "write_study",
]
