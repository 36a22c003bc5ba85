from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint, write_checkpoint
from .flow_net import (
    AdamState,
    FlowBatch,
    MlpParams,
    TrainReport,
    adam_step,
    forward,
    gradients,
    init_params,
    interpolate,
    rfm_loss,
    train,
)
from .redis_checkpointer import RedisCheckpointStore, connect_checkpoint_store

__all__ = [
    "AdamState",
    "Checkpoint",
    "FlowBatch",
    "MlpParams",
    "RedisCheckpointStore",
    "TrainReport",
    "adam_step",
    "connect_checkpoint_store",
    "forward",
    "gradients",
    "init_params",
    "interpolate",
    "load_checkpoint",
    "rfm_loss",
    "save_checkpoint",
    "train",
    "write_checkpoint",
]
