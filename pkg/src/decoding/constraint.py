# TableGen Table Constraint
"""
Token-mask automaton that keeps generated sequences parseable as
rectangular tables.

The first row of each table may hold any positive number of cells and may
only end right after a <s>; its cell count n_c then fixes every later row
of that table, which must close after exactly n_c cells. A caption line
starts a new table and resets n_c.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import FrozenSet, NamedTuple, Optional, Tuple

import torch
from torch import Tensor

from ..errors import DisallowedTokenError
from ..text.vocab import BOS_ID, EOS_ID, NEWLINE_ID, NUM_SPECIALS, PAD_ID, SEP_ID, UNK_ID


class Phase(Enum):
    FIRST_ROW = "first_row"
    BODY_ROW = "body_row"
    CAPTION = "caption"


@dataclass(frozen=True)
class ConstraintState:
    """
    Automaton state after a prefix. cells_in_row counts the cells closed
    so far in the current row; n_c is None until the first row closes.
    """

    phase: Phase = Phase.FIRST_ROW
    n_c: Optional[int] = None
    cells_in_row: int = 0
    last_token_was_sep: bool = False

    # Next token opens a line
    line_start: bool = True

    # Nothing but <bos> generated yet
    at_start: bool = True

    # The document opened with a caption, so later tables need captions too
    captioned: bool = False

    current_caption: Tuple[int, ...] = ()
    seen_captions: FrozenSet[Tuple[int, ...]] = frozenset()
    finished: bool = False


class AllowedClasses(NamedTuple):
    """Which token classes the next position may take."""

    words: bool
    sep: bool
    newline: bool
    eos: bool


def allowed_classes(st: ConstraintState, strict: bool = False) -> AllowedClasses:
    """
    Args:
        st: Current state
        strict: Forbid caption lines; every line must open with <s>
    """
    if st.finished:
        return AllowedClasses(words=False, sep=False, newline=False, eos=True)

    if st.line_start:
        if st.phase is Phase.FIRST_ROW:
            may_caption = st.at_start
        else:
            may_caption = st.captioned
        return AllowedClasses(words=may_caption and not strict, sep=True, newline=False, eos=False)

    if st.phase is Phase.CAPTION:
        closable = st.current_caption not in st.seen_captions
        return AllowedClasses(words=True, sep=False, newline=closable, eos=False)

    if st.phase is Phase.FIRST_ROW:
        # an empty first row would give n_c = 0
        closable = st.last_token_was_sep and st.cells_in_row >= 1
        return AllowedClasses(words=True, sep=True, newline=closable, eos=closable)

    if st.cells_in_row == st.n_c:
        return AllowedClasses(words=False, sep=False, newline=True, eos=True)
    return AllowedClasses(words=True, sep=True, newline=False, eos=False)


def constraint_mask(st: ConstraintState, vocab_size: int, strict: bool = False) -> Tensor:
    """Boolean (vocab_size,) tensor; True marks allowed ids. <pad> and <bos> are never allowed."""
    classes = allowed_classes(st, strict)
    mask = torch.zeros(vocab_size, dtype=torch.bool)
    if classes.words:
        mask[NUM_SPECIALS:] = True
        mask[UNK_ID] = True
    mask[SEP_ID] = classes.sep
    mask[NEWLINE_ID] = classes.newline
    mask[EOS_ID] = classes.eos
    return mask


def is_allowed(st: ConstraintState, token: int, vocab_size: int, strict: bool = False) -> bool:
    if not 0 <= token < vocab_size or token in (PAD_ID, BOS_ID):
        return False
    classes = allowed_classes(st, strict)
    if token == SEP_ID:
        return classes.sep
    if token == NEWLINE_ID:
        return classes.newline
    if token == EOS_ID:
        return classes.eos
    return classes.words


def constraint_advance(st: ConstraintState, token: int, vocab_size: int,
                       strict: bool = False) -> ConstraintState:
    """
    State after appending `token`.

    Raises:
        DisallowedTokenError: The mask of `st` forbids `token`.
    """
    if not is_allowed(st, token, vocab_size, strict):
        raise DisallowedTokenError(
            f"Token {token} is not allowed in phase {st.phase.value} "
            f"(n_c={st.n_c}, cells_in_row={st.cells_in_row}, line_start={st.line_start})."
        )

    if token == EOS_ID:
        return replace(st, finished=True, line_start=False, last_token_was_sep=False)

    if st.line_start:
        if token == SEP_ID:
            return replace(st, line_start=False, at_start=False, cells_in_row=0, last_token_was_sep=True)
        return replace(
            st,
            phase=Phase.CAPTION,
            n_c=None,
            cells_in_row=0,
            line_start=False,
            at_start=False,
            captioned=True,
            current_caption=(token,),
            last_token_was_sep=False,
        )

    if token == NEWLINE_ID:
        if st.phase is Phase.CAPTION:
            return replace(
                st,
                phase=Phase.FIRST_ROW,
                seen_captions=st.seen_captions | {st.current_caption},
                current_caption=(),
                line_start=True,
            )
        if st.phase is Phase.FIRST_ROW:
            return replace(st, phase=Phase.BODY_ROW, n_c=st.cells_in_row, cells_in_row=0,
                           line_start=True, last_token_was_sep=False)
        return replace(st, cells_in_row=0, line_start=True, last_token_was_sep=False)

    if token == SEP_ID:
        return replace(st, cells_in_row=st.cells_in_row + 1, last_token_was_sep=True)

    if st.phase is Phase.CAPTION:
        return replace(st, current_caption=st.current_caption + (token,))
    return replace(st, last_token_was_sep=False)


class TableConstraint:
    """Constraint bound to one vocabulary size and strictness."""

    def __init__(self, vocab_size: int, strict: bool = False):
        self.vocab_size = vocab_size
        self.strict = strict

    def initial(self) -> ConstraintState:
        return ConstraintState()

    def mask(self, st: ConstraintState) -> Tensor:
        return constraint_mask(st, self.vocab_size, self.strict)

    def advance(self, st: ConstraintState, token: int) -> ConstraintState:
        return constraint_advance(st, token, self.vocab_size, self.strict)

    def accepts(self, ts: Tuple[int, ...]) -> bool:
        """Whether a <bos>-prefixed sequence is accepted token by token."""
        st = self.initial()
        for token in ts[1:]:
            if not is_allowed(st, token, self.vocab_size, self.strict):
                return False
            st = self.advance(st, token)
        return True
