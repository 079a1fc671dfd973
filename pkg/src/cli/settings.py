# TableGen CLI Settings
"""
Run settings resolved from four layers, highest first:

    command-line flag > --config key=value file > TBLGEN_* environment > default

Config file keys are the long flag names with '-' replaced by '_'. The
environment layer also reads an optional .env file in the working directory.
"""

import os
import typing
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Final, Mapping, Optional

from dotenv import dotenv_values, load_dotenv

from ..decoding.generator import DEFAULT_MAX_DECODE_LEN, GenerationOptions
from ..data.synth import SynthConfig
from ..errors import UsageError
from ..evaluation.metrics import AVERAGES
from ..model.config import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_CLIP_NORM,
    DEFAULT_EPOCHS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MAX_LEN,
    ModelConfig,
    TrainingConfig,
)
from ..tables.table import HeaderMode

ENV_PREFIX: Final[str] = "TBLGEN_"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunSettings:
    """Every tunable a subcommand may read."""

    seed: int = 0

    # ------ synthetic corpus ------
    n_examples: int = 1000
    domain: str = "game"
    min_entities: int = 2
    max_entities: int = 5
    min_stat_types: int = 2
    max_stat_types: int = 4
    synonym_rate: float = 0.3
    distractor_rate: float = 0.3
    omission_rate: float = 0.1

    # ------ vocabulary and data ------
    min_freq: int = 1
    valid_fraction: float = 0.1
    header_mode: Optional[str] = None

    # ------ model ------
    preset: str = "base"
    d_model: Optional[int] = None
    n_heads: Optional[int] = None
    d_ff: Optional[int] = None
    n_enc_layers: Optional[int] = None
    n_dec_layers: Optional[int] = None
    model_max_len: int = DEFAULT_MAX_LEN
    dropout: float = 0.1

    # ------ training ------
    learning_rate: float = DEFAULT_LEARNING_RATE
    clip_norm: float = DEFAULT_CLIP_NORM
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    valid_limit: int = 200

    # ------ decoding ------
    tre: bool = True
    constraint: bool = True
    strategy: str = "greedy"
    beam: int = 1
    max_len: int = DEFAULT_MAX_DECODE_LEN
    temperature: float = 1.0
    length_norm: bool = False
    strict: bool = False

    # ------ evaluation and execution ------
    average: str = "table"
    jobs: int = 1

    def validate(self) -> None:
        if self.header_mode is not None:
            HeaderMode(self.header_mode)
        if self.average not in AVERAGES:
            raise ValueError(f"average must be one of {AVERAGES}, got '{self.average}'.")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}.")
        if self.valid_limit < 0:
            raise ValueError(f"valid_limit must be >= 0, got {self.valid_limit}.")
        if not 0.0 <= self.valid_fraction < 1.0:
            raise ValueError(f"valid_fraction must be in [0, 1), got {self.valid_fraction}.")
        if self.min_freq < 1:
            raise ValueError(f"min_freq must be >= 1, got {self.min_freq}.")
        self.synth_config().validate()
        self.training_config().validate()
        self.generation_options().validate()

    # ============================================
    # VIEWS
    # ============================================

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            n_examples=self.n_examples,
            domain=self.domain,
            n_entities_range=(self.min_entities, self.max_entities),
            n_stat_types_range=(self.min_stat_types, self.max_stat_types),
            distractor_sentence_rate=self.distractor_rate,
            synonym_rate=self.synonym_rate,
            omission_rate=self.omission_rate,
            seed=self.seed,
        )

    def model_config(self, vocab_size: int) -> ModelConfig:
        base = ModelConfig.preset(self.preset, vocab_size, max_len=self.model_max_len)
        overrides = {
            name: getattr(self, name)
            for name in ("d_model", "n_heads", "d_ff", "n_enc_layers", "n_dec_layers")
            if getattr(self, name) is not None
        }
        cfg = ModelConfig(**{**asdict(base), **overrides, "dropout": self.dropout})
        cfg.validate()
        return cfg

    def training_config(self, use_tre: Optional[bool] = None) -> TrainingConfig:
        return TrainingConfig(
            learning_rate=self.learning_rate,
            clip_norm=self.clip_norm,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
            use_tre=self.tre if use_tre is None else use_tre,
        )

    def generation_options(self, header_mode: HeaderMode = HeaderMode.BOTH,
                           constraint: Optional[bool] = None,
                           tre: Optional[bool] = None) -> GenerationOptions:
        strategy = self.strategy
        if strategy == "greedy" and self.beam > 1:
            strategy = "beam"
        return GenerationOptions(
            constraint=self.constraint if constraint is None else constraint,
            tre=self.tre if tre is None else tre,
            strategy=strategy,
            beam_width=self.beam,
            max_len=self.max_len,
            temperature=self.temperature,
            length_normalize=self.length_norm,
            strict=self.strict,
            header_mode=header_mode,
        )


# ============================================
# LAYERED RESOLUTION
# ============================================

def _field_types() -> Dict[str, type]:
    hints = typing.get_type_hints(RunSettings)
    out = {}
    for f in fields(RunSettings):
        hint = hints[f.name]
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        out[f.name] = args[0] if args else hint
    return out


def _coerce(name: str, raw: str, kind: type, origin: str) -> Any:
    text = raw.strip()
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise UsageError(f"{origin}: '{name}' expects {kind.__name__}, got '{raw}'.") from None


def resolve_settings(
    flags: Mapping[str, Any],
    config_path: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
    read_dotenv: bool = True,
) -> RunSettings:
    """
    Merge the layers into validated settings.

    Args:
        flags: Parsed command-line values; None means "not given"
        config_path: key=value file named by --config
        environ: Environment to read; defaults to os.environ
        read_dotenv: Load ./.env into the process environment first

    Raises:
        UsageError: Unknown config key, unparsable value or invalid setting.
    """
    if environ is None:
        if read_dotenv:
            load_dotenv(dotenv_path=Path.cwd() / ".env", override=False)
        environ = os.environ

    types = _field_types()
    values: Dict[str, Any] = {}

    for name, kind in types.items():
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw, kind, f"environment {ENV_PREFIX}{name.upper()}")

    if config_path is not None:
        if not Path(config_path).is_file():
            raise UsageError(f"Config file {config_path} does not exist.")
        for key, raw in dotenv_values(config_path).items():
            name = key.strip().replace("-", "_")
            if name not in types:
                raise UsageError(f"Config file {config_path}: unknown key '{key}'.")
            if raw is None:
                raise UsageError(f"Config file {config_path}: key '{key}' has no value.")
            values[name] = _coerce(name, raw, types[name], f"config file {config_path}")

    for name, value in flags.items():
        if name in types and value is not None:
            values[name] = value

    settings = RunSettings(**values)
    try:
        settings.validate()
    except ValueError as e:
        raise UsageError(str(e)) from e
    return settings
