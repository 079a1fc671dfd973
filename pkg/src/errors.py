# TableGen Errors
"""
Exception hierarchy shared by every module.

DataError covers bad inputs (datasets, token streams, documents).
RuntimeFailure covers failures of the machinery itself (model shapes,
divergence, checkpoints, decoding invariants).
"""

from typing import Sequence


class TableGenError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(TableGenError):
    """Bad command-line usage or configuration key."""


# ============================================
# DATA ERRORS
# ============================================

class DataError(TableGenError):
    """Invalid input data."""


class InvalidDocumentError(DataError):
    """A document fails table validation and cannot be serialized."""

    def __init__(self, violations: Sequence[object]):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"Invalid document ({len(self.violations)} violations): {summary}")


class EmptyOutputError(DataError):
    """A token sequence contains no table row at all."""


class MalformedSequenceError(DataError, ValueError):
    """A token sequence does not begin with <bos>."""


class EmptyCorpusError(DataError):
    """A vocabulary was requested from a corpus without tokens."""


class UnknownIdError(DataError):
    """A token id is absent from the vocabulary."""

    def __init__(self, token_id: int, vocab_size: int):
        self.token_id = token_id
        super().__init__(f"Token id {token_id} is not in the vocabulary (size {vocab_size}).")


class VocabFormatError(DataError):
    """A vocabulary file does not start with the reserved special tokens."""


class DatasetParseError(DataError):
    """A dataset line could not be parsed."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"Line {line}: {reason}")


class DatasetIOError(DataError):
    """A dataset file could not be read or written."""


class CellIndexError(DataError, IndexError):
    """A cell address lies outside the table."""


class HeaderRequestError(DataError):
    """Header lookup was requested for a header cell."""


# ============================================
# RUNTIME FAILURES
# ============================================

class RuntimeFailure(TableGenError):
    """Failure of the model, decoder or checkpoint machinery."""


class ShapeMismatchError(RuntimeFailure):
    """Tensor shapes disagree with each other or with the model configuration."""


class SequenceTooLongError(RuntimeFailure):
    """A sequence exceeds the model's position capacity."""


class NonFiniteLossError(RuntimeFailure):
    """Training loss became NaN or infinite."""


class DisallowedTokenError(RuntimeFailure):
    """A token was fed to the table constraint that its mask forbids."""


class NoValidTokenError(RuntimeFailure):
    """The constraint mask left no candidate token."""


class CheckpointFormatError(RuntimeFailure):
    """Checkpoint magic, version or header is not understood."""


class CheckpointIOError(RuntimeFailure):
    """Checkpoint file could not be read or written."""
