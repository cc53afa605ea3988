"""Manually-differentiated micro neural stack (layers + network assembly)."""

from .layers import (
    BatchNorm,
    BiLSTM,
    Conv1D,
    Dense,
    Dropout,
    Embedding,
    GlobalMaxPool,
    LSTM,
    Param,
    ReLU,
    sigmoid,
)
from .network import (
    MicroNet,
    NetConfig,
    TrainHyper,
    TrainReport,
    ablate,
    build_token_table,
    encode_tokens,
    load_checkpoint,
    load_token_table,
    loss_and_grad,
    param_count,
    planted_signal_dataset,
    save_checkpoint,
    save_token_table,
    standard_ablation_configs,
    train,
)

__all__ = [
    "Param",
    "Embedding",
    "Conv1D",
    "BatchNorm",
    "ReLU",
    "GlobalMaxPool",
    "Dense",
    "Dropout",
    "LSTM",
    "BiLSTM",
    "sigmoid",
    "NetConfig",
    "TrainHyper",
    "TrainReport",
    "MicroNet",
    "train",
    "loss_and_grad",
    "param_count",
    "ablate",
    "standard_ablation_configs",
    "planted_signal_dataset",
    "save_checkpoint",
    "load_checkpoint",
    "build_token_table",
    "encode_tokens",
    "save_token_table",
    "load_token_table",
]
