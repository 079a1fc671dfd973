# TableGen Vocabulary
"""
Word-level vocabulary with the six reserved special tokens.

Ids 0-5 are always <pad>, <bos>, <eos>, <unk>, <s>, <n>; the remaining ids
are assigned by descending frequency, ties broken lexicographically, so the
same corpus always yields the same ids.
"""

import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Final, Iterable, List, Sequence, Tuple, Union

from ..errors import DatasetIOError, EmptyCorpusError, UnknownIdError, VocabFormatError


# ============================================
# SPECIAL TOKENS
# ============================================

PAD_ID: Final[int] = 0
BOS_ID: Final[int] = 1
EOS_ID: Final[int] = 2
UNK_ID: Final[int] = 3
SEP_ID: Final[int] = 4
NEWLINE_ID: Final[int] = 5

SPECIAL_TOKENS: Final[Tuple[str, ...]] = ("<pad>", "<bos>", "<eos>", "<unk>", "<s>", "<n>")
NUM_SPECIALS: Final[int] = len(SPECIAL_TOKENS)

TokenSequence = List[int]


@dataclass(frozen=True)
class Vocab:
    """Immutable token <-> id mapping."""

    tokens: Tuple[str, ...]
    id_of: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.tokens[:NUM_SPECIALS] != SPECIAL_TOKENS:
            raise VocabFormatError(
                f"Vocabulary must begin with {list(SPECIAL_TOKENS)}, "
                f"got {list(self.tokens[:NUM_SPECIALS])}."
            )
        mapping = {tok: i for i, tok in enumerate(self.tokens)}
        if len(mapping) != len(self.tokens):
            raise VocabFormatError("Vocabulary contains duplicate tokens.")
        object.__setattr__(self, "id_of", mapping)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def token_of(self) -> Tuple[str, ...]:
        """Inverse of id_of, indexed by id."""
        return self.tokens

    def token(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise UnknownIdError(token_id, len(self.tokens))
        return self.tokens[token_id]

    def lookup(self, word: str) -> int:
        """Id of a raw word; special surface forms and unknown words map to <unk>."""
        token_id = self.id_of.get(word, UNK_ID)
        return UNK_ID if token_id < NUM_SPECIALS else token_id

    # ============================================
    # PERSISTENCE
    # ============================================

    def save(self, path: Union[str, Path]) -> None:
        """Write one token per line; line number is the id."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".vocab-")
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write("\n".join(self.tokens) + "\n")
            os.replace(tmp, path)
        except OSError as e:
            raise DatasetIOError(f"Cannot write vocabulary to {path}: {e}") from e

    @staticmethod
    def load(path: Union[str, Path]) -> "Vocab":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise DatasetIOError(f"Cannot read vocabulary {path}: {e}") from e
        return Vocab(tokens=tuple(line for line in text.split("\n") if line))


def build_vocab(corpus: Iterable[str], min_freq: int = 1) -> Vocab:
    """
    Build a vocabulary from whitespace-delimited text.

    Args:
        corpus: Texts to count tokens in
        min_freq: Minimum occurrences for a token to be kept

    Raises:
        EmptyCorpusError: If the corpus holds no tokens at all.
    """
    if min_freq < 1:
        raise ValueError(f"min_freq must be >= 1, got {min_freq}.")

    counts: Counter = Counter()
    for text in corpus:
        counts.update(text.split())
    if not counts:
        raise EmptyCorpusError("Cannot build a vocabulary from an empty corpus.")

    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_freq and tok not in SPECIAL_TOKENS),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocab(tokens=SPECIAL_TOKENS + tuple(kept))


def encode_text(v: Vocab, s: str) -> TokenSequence:
    """Map whitespace-delimited words to ids; unknown words become <unk>."""
    return [v.lookup(word) for word in s.split()]


def decode_text(v: Vocab, ts: Sequence[int]) -> str:
    """Join the surface forms of ids with single spaces."""
    return " ".join(v.token(i) for i in ts)
