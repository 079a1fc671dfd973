# TableGen Model Configuration
"""
Model and training hyperparameters.
Defaults are sized for CPU training on synthetic corpora.
"""

from dataclasses import dataclass, replace
from typing import Dict, Final


# ============================================
# ARCHITECTURE DEFAULTS
# ============================================

DEFAULT_D_MODEL: Final[int] = 128
DEFAULT_N_HEADS: Final[int] = 4
DEFAULT_D_FF: Final[int] = 512
DEFAULT_ENC_LAYERS: Final[int] = 2
DEFAULT_DEC_LAYERS: Final[int] = 2
DEFAULT_MAX_LEN: Final[int] = 512
DEFAULT_DROPOUT: Final[float] = 0.1

# ============================================
# OPTIMIZER DEFAULTS
# ============================================

ADAM_BETAS: Final[tuple] = (0.9, 0.999)
ADAM_EPS: Final[float] = 1e-8

DEFAULT_LEARNING_RATE: Final[float] = 5e-4
DEFAULT_CLIP_NORM: Final[float] = 1.0
DEFAULT_BATCH_SIZE: Final[int] = 32
DEFAULT_EPOCHS: Final[int] = 20

# name -> layer shapes
PRESETS: Final[Dict[str, Dict[str, int]]] = {
    "tiny": dict(d_model=16, n_heads=2, d_ff=32, n_enc_layers=1, n_dec_layers=1),
    "base": dict(d_model=128, n_heads=4, d_ff=512, n_enc_layers=2, n_dec_layers=2),
    "large": dict(d_model=256, n_heads=8, d_ff=1024, n_enc_layers=4, n_dec_layers=4),
}


@dataclass(frozen=True)
class ModelConfig:
    """
    Immutable encoder-decoder shape.
    d_model must split evenly over the heads; d_k is derived.
    """

    vocab_size: int
    d_model: int = DEFAULT_D_MODEL
    n_heads: int = DEFAULT_N_HEADS
    d_ff: int = DEFAULT_D_FF
    n_enc_layers: int = DEFAULT_ENC_LAYERS
    n_dec_layers: int = DEFAULT_DEC_LAYERS

    # Positions available to source and target alike
    max_len: int = DEFAULT_MAX_LEN

    # Applied to attention weights and feed-forward activations
    dropout: float = DEFAULT_DROPOUT

    @property
    def d_k(self) -> int:
        return self.d_model // self.n_heads

    def validate(self) -> None:
        """Raise ValueError naming the first inconsistent field."""
        for name in ("vocab_size", "d_model", "n_heads", "d_ff",
                     "n_enc_layers", "n_dec_layers", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}.")
        if self.d_model % self.n_heads:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})."
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}.")

    def with_vocab(self, vocab_size: int) -> "ModelConfig":
        return replace(self, vocab_size=vocab_size)

    @staticmethod
    def preset(name: str, vocab_size: int, max_len: int = DEFAULT_MAX_LEN) -> "ModelConfig":
        """
        Named sizes: "tiny" for tests, "base" and "large" for experiments.

        Raises:
            ValueError: Unknown preset name.
        """
        if name not in PRESETS:
            raise ValueError(f"Unknown model preset '{name}'; choose from {sorted(PRESETS)}.")
        return ModelConfig(vocab_size=vocab_size, max_len=max_len, **PRESETS[name])


@dataclass(frozen=True)
class TrainingConfig:
    """Optimization hyperparameters for one training run."""

    learning_rate: float = DEFAULT_LEARNING_RATE
    clip_norm: float = DEFAULT_CLIP_NORM
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0

    # Relation-augmented decoder self-attention
    use_tre: bool = True

    # Validation decoding applies the table constraint
    constrained_validation: bool = True

    def validate(self) -> None:
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}.")
        if self.clip_norm <= 0:
            raise ValueError(f"clip_norm must be > 0, got {self.clip_norm}.")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}.")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}.")
