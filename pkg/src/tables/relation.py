# TableGen Table Relations
"""
Row-header and column-header relations between target positions.

For a token in a non-header cell (r, c), including the <s> that closes that
cell, every earlier token inside cell (r, 1) is labelled ROW_HEADER and
every token inside cell (1, c) is labelled COL_HEADER, as far as the header
mode declares those headers. Positions are indices into the token sequence,
with <bos> at position 0.

relations_full parses a complete sequence into a grid in one pass;
RelationState produces the same labels one token at a time during
generation.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import MalformedSequenceError
from ..text.vocab import BOS_ID, EOS_ID, NEWLINE_ID, SEP_ID
from .table import HeaderMode


class RelationLabel(IntEnum):
    """Relation of position j to position i. Values index the relation embeddings."""

    NONE = 0
    ROW_HEADER = 1
    COL_HEADER = 2


LabeledPosition = Tuple[int, RelationLabel]


@dataclass(frozen=True)
class RelationMatrix:
    """Sparse labels for pairs (i, j) with j < i; absent pairs are NONE."""

    labels: Dict[Tuple[int, int], RelationLabel] = field(default_factory=dict)


def _is_target(mode: HeaderMode, row: int, col: int) -> bool:
    if mode is HeaderMode.BOTH:
        return row >= 2 and col >= 2
    if mode is HeaderMode.COL_ONLY:
        return row >= 2
    return col >= 2


def _header_labels(
    mode: HeaderMode,
    col: int,
    row_header: Optional[Sequence[int]],
    first_row: Sequence[Sequence[int]],
) -> List[LabeledPosition]:
    labels: List[LabeledPosition] = []
    if mode.has_row_headers and row_header is not None:
        labels.extend((j, RelationLabel.ROW_HEADER) for j in row_header)
    # cells beyond the first row's width have no column header
    if mode.has_col_headers and col <= len(first_row):
        labels.extend((j, RelationLabel.COL_HEADER) for j in first_row[col - 1])
    return labels


# ============================================
# FULL-SEQUENCE PARSE
# ============================================

def relations_full(ts: Sequence[int], mode: HeaderMode) -> RelationMatrix:
    """
    Relation labels for every position of a (possibly partial) sequence.

    Args:
        ts: Token ids beginning with <bos>
        mode: Header mode of the tables in the sequence

    Returns:
        RelationMatrix; malformed regions simply carry no labels.

    Raises:
        MalformedSequenceError: If the sequence lacks the leading <bos>.
    """
    if not ts or ts[0] != BOS_ID:
        raise MalformedSequenceError("Token sequence must begin with <bos>.")

    lines: List[List[Tuple[int, int]]] = [[]]
    for pos in range(1, len(ts)):
        token = ts[pos]
        if token == EOS_ID:
            break
        if token == NEWLINE_ID:
            lines.append([])
        else:
            lines[-1].append((pos, token))

    labels: Dict[Tuple[int, int], RelationLabel] = {}
    first_row: List[List[int]] = []
    row_index = 0
    for line in lines:
        if not line:
            continue
        if line[0][1] != SEP_ID:
            # caption: opens a new table
            first_row = []
            row_index = 0
            continue

        row_index += 1
        # each cell: (word positions, member positions incl. closing <s>)
        cells: List[Tuple[List[int], List[int]]] = []
        words: List[int] = []
        members: List[int] = []
        for pos, token in line[1:]:
            members.append(pos)
            if token == SEP_ID:
                cells.append((words, members))
                words, members = [], []
            else:
                words.append(pos)
        closed = [w for w, _ in cells]
        if members:
            cells.append((words, members))

        if row_index == 1:
            first_row = closed
        row_header = closed[0] if closed else None

        for col, (_, cell_members) in enumerate(cells, start=1):
            if not _is_target(mode, row_index, col):
                continue
            header = _header_labels(mode, col, row_header, first_row)
            for i in cell_members:
                for j, label in header:
                    labels[(i, j)] = label

    return RelationMatrix(labels)


# ============================================
# INCREMENTAL PARSE
# ============================================

@dataclass
class RelationState:
    """
    Parse cursor over a generated prefix. Single owner; use clone() to fork
    it for another hypothesis.
    """

    mode: HeaderMode
    at_line_start: bool = True
    in_caption: bool = False
    finished: bool = False
    row_index: int = 0
    col_index: int = 0
    current_words: List[int] = field(default_factory=list)
    row_header: Optional[List[int]] = None
    first_row: List[List[int]] = field(default_factory=list)

    def clone(self) -> "RelationState":
        return RelationState(
            mode=self.mode,
            at_line_start=self.at_line_start,
            in_caption=self.in_caption,
            finished=self.finished,
            row_index=self.row_index,
            col_index=self.col_index,
            current_words=list(self.current_words),
            row_header=self.row_header,
            first_row=list(self.first_row),
        )

    def advance(self, token: int, position: int) -> List[LabeledPosition]:
        """Consume the token at `position`; return its labels."""
        if self.finished:
            return []
        if token == EOS_ID:
            self.finished = True
            return []
        if token == NEWLINE_ID:
            self.at_line_start = True
            return []

        if self.at_line_start:
            self.at_line_start = False
            if token == SEP_ID:
                self.in_caption = False
                self.row_index += 1
                self.col_index = 1
                self.current_words = []
                self.row_header = None
                if self.row_index == 1:
                    self.first_row = []
            else:
                self.in_caption = True
                self.row_index = 0
                self.first_row = []
            return []

        if self.in_caption:
            return []

        labels: List[LabeledPosition] = []
        if _is_target(self.mode, self.row_index, self.col_index):
            labels = _header_labels(self.mode, self.col_index, self.row_header, self.first_row)

        if token == SEP_ID:
            closed = self.current_words
            if self.row_index == 1:
                self.first_row.append(closed)
            if self.col_index == 1:
                self.row_header = closed
            self.col_index += 1
            self.current_words = []
        else:
            self.current_words.append(position)
        return labels


def relation_step(
    st: RelationState, token: int, position: int
) -> Tuple[RelationState, List[LabeledPosition]]:
    """Functional form of RelationState.advance; the input state is left untouched."""
    nxt = st.clone()
    labels = nxt.advance(token, position)
    return nxt, labels


def initial_relation_state(mode: HeaderMode) -> RelationState:
    """State after consuming <bos> at position 0."""
    return RelationState(mode=mode)
