# TableGen Model Module
"""
Encoder-decoder with relation-aware decoder self-attention, training and checkpoints.
"""

from .config import ModelConfig, TrainingConfig
from .transformer import TableGenTransformer, attention_with_relations
from .batching import Batch, EncodedExample, encode_record, make_batch
from .training import fit, sequence_loss, train_step
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "TrainingConfig",
    "TableGenTransformer",
    "attention_with_relations",
    "Batch",
    "EncodedExample",
    "encode_record",
    "make_batch",
    "fit",
    "sequence_loss",
    "train_step",
    "load_checkpoint",
    "save_checkpoint",
]
