# TableGen Data Module
"""
JSONL datasets and synthetic corpora.
"""

from .dataset import (
    DatasetRecord,
    Prediction,
    corpus_stats,
    filter_unsupported_cells,
    load_dataset,
    load_predictions,
    save_dataset,
    save_predictions,
)
from .synth import SynthConfig, generate_corpus

__all__ = [
    "DatasetRecord",
    "Prediction",
    "corpus_stats",
    "filter_unsupported_cells",
    "load_dataset",
    "load_predictions",
    "save_dataset",
    "save_predictions",
    "SynthConfig",
    "generate_corpus",
]
