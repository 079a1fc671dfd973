# TableGen Checkpoints
"""
Binary checkpoint format:

    b"TBLGEN"                      magic
    uint32 LE                      format version
    uint32 LE                      header length in bytes
    header (UTF-8 JSON)            {"config": {...}, "vocab_path": str | null,
                                    "tensors": [{"name", "shape", "offset", "nbytes"}, ...]}
    data                           little-endian float32 tensors in header order
"""

import json
import logging
import os
import tempfile
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Final, List, Optional, Tuple, Union

import numpy as np
import torch

from ..errors import CheckpointFormatError, CheckpointIOError, ShapeMismatchError
from .config import ModelConfig
from .transformer import TableGenTransformer

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC: Final[bytes] = b"TBLGEN"
CHECKPOINT_VERSION: Final[int] = 1

_PREFIX = len(CHECKPOINT_MAGIC) + 8


def save_checkpoint(model: TableGenTransformer, path: Union[str, Path],
                    vocab_path: Optional[Union[str, Path]] = None) -> None:
    """Write the model atomically; a failed write leaves any old file intact."""
    tensors: List[Dict[str, Any]] = []
    blobs: List[bytes] = []
    offset = 0
    for name, tensor in model.state_dict().items():
        blob = tensor.detach().cpu().to(torch.float32).numpy().astype("<f4").tobytes()
        tensors.append({"name": name, "shape": list(tensor.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)

    header = json.dumps({
        "config": asdict(model.config),
        "vocab_path": None if vocab_path is None else str(vocab_path),
        "tensors": tensors,
    }).encode("utf-8")

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}-")
        with os.fdopen(fd, "wb") as handle:
            handle.write(CHECKPOINT_MAGIC)
            handle.write(np.array([CHECKPOINT_VERSION, len(header)], dtype="<u4").tobytes())
            handle.write(header)
            for blob in blobs:
                handle.write(blob)
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointIOError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info(f"Saved checkpoint {path} ({offset} bytes of tensors)")


def _parse_header(raw: bytes, path: Path) -> Tuple[Dict[str, Any], int]:
    if len(raw) < _PREFIX or raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"{path} is not a checkpoint (bad magic).")
    version, header_len = (int(x) for x in np.frombuffer(raw, dtype="<u4", count=2,
                                                          offset=len(CHECKPOINT_MAGIC)))
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(
            f"{path} has format version {version}, expected {CHECKPOINT_VERSION}."
        )
    if len(raw) < _PREFIX + header_len:
        raise CheckpointFormatError(f"{path} is truncated inside its header.")
    try:
        header = json.loads(raw[_PREFIX:_PREFIX + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"{path} has an unreadable header: {e}") from e
    if not isinstance(header, dict) or not {"config", "tensors"} <= set(header):
        raise CheckpointFormatError(f"{path} header lacks 'config' or 'tensors'.")
    return header, _PREFIX + header_len


def _config_from_header(fields: Any, path: Path) -> ModelConfig:
    try:
        config = ModelConfig(**fields)
        for name, value in asdict(config).items():
            kind = float if name == "dropout" else int
            if isinstance(value, bool) or not isinstance(value, (int, kind)):
                raise TypeError(f"{name} is {value!r}")
        config.validate()
    except (TypeError, ValueError) as e:
        raise CheckpointFormatError(f"{path} has an invalid configuration: {e}") from e
    return config


def load_checkpoint(
    path: Union[str, Path],
    expected: Optional[ModelConfig] = None,
) -> Tuple[TableGenTransformer, Optional[str]]:
    """
    Rebuild a model from a checkpoint; nothing is returned on any failure.

    Args:
        expected: Configuration the caller requires; None accepts the embedded one.

    Returns:
        (model in eval mode, stored vocabulary path)

    Raises:
        CheckpointIOError: File unreadable.
        CheckpointFormatError: Bad magic, version, header or truncated data.
        ShapeMismatchError: Embedded configuration or tensor shapes disagree.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointIOError(f"Cannot read checkpoint {path}: {e}") from e

    header, data_start = _parse_header(raw, path)
    config = _config_from_header(header["config"], path)
    if expected is not None and expected != config:
        raise ShapeMismatchError(f"Checkpoint configuration {config} differs from expected {expected}.")

    model = TableGenTransformer(config)
    state = model.state_dict()
    entries = {entry["name"]: entry for entry in header["tensors"]}
    if set(entries) != set(state):
        raise CheckpointFormatError(
            f"{path} tensor names differ from the model: "
            f"missing {sorted(set(state) - set(entries))}, extra {sorted(set(entries) - set(state))}."
        )

    loaded = {}
    for name, target in state.items():
        entry = entries[name]
        if list(target.shape) != list(entry["shape"]):
            raise ShapeMismatchError(
                f"Tensor {name} has shape {entry['shape']}, model expects {list(target.shape)}."
            )
        start = data_start + int(entry["offset"])
        end = start + int(entry["nbytes"])
        if end > len(raw) or int(entry["nbytes"]) != 4 * target.numel():
            raise CheckpointFormatError(f"{path} is truncated at tensor {name}.")
        array = np.frombuffer(raw[start:end], dtype="<f4").reshape(entry["shape"])
        loaded[name] = torch.from_numpy(array.astype(np.float32))

    model.load_state_dict(loaded)
    model.eval()
    return model, header.get("vocab_path")
