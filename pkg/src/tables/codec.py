# TableGen Table Codec
"""
Bidirectional mapping between documents and token sequences.

A row is  <s> c1 <s> c2 <s> ... <s> ck <s>, rows of a table are joined by
<n>, a captioned table is preceded by its caption line and <n>, and the
whole sequence is wrapped in <bos> ... <eos>. A line whose first token is
not <s> is a caption.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..errors import EmptyOutputError, InvalidDocumentError, MalformedSequenceError
from ..text.vocab import (
    BOS_ID,
    EOS_ID,
    NEWLINE_ID,
    PAD_ID,
    SEP_ID,
    TokenSequence,
    Vocab,
    decode_text,
    encode_text,
)
from .table import Document, HeaderMode, Table, validate_document


@dataclass(frozen=True)
class LinearizedRow:
    """Cell texts of one parsed row, in order."""

    cells: Tuple[str, ...]


@dataclass(frozen=True)
class DecodeResult:
    """
    Parsed document plus whether the raw sequence was well formed.
    When well_formed is False the document is the repaired one.
    """

    document: Document
    well_formed: bool


# ============================================
# ENCODING
# ============================================

def _encode_row(v: Vocab, row: Sequence[str]) -> TokenSequence:
    ids = [SEP_ID]
    for content in row:
        ids.extend(encode_text(v, content))
        ids.append(SEP_ID)
    return ids


def encode_table(v: Vocab, t: Table) -> TokenSequence:
    """Serialize one table (caption line included), without <bos>/<eos>."""
    lines: List[TokenSequence] = []
    if t.caption is not None:
        lines.append(encode_text(v, t.caption))
    lines.extend(_encode_row(v, row) for row in t.rows)

    ids: TokenSequence = []
    for k, line in enumerate(lines):
        if k:
            ids.append(NEWLINE_ID)
        ids.extend(line)
    return ids


def encode_document(v: Vocab, d: Document) -> TokenSequence:
    """
    Serialize a document to <bos> ... <eos>.

    Raises:
        InvalidDocumentError: If the document breaks any table or document invariant.
    """
    violations = validate_document(d)
    if violations:
        raise InvalidDocumentError(violations)

    ids = [BOS_ID]
    for k, table in enumerate(d.tables):
        if k:
            ids.append(NEWLINE_ID)
        ids.extend(encode_table(v, table))
    ids.append(EOS_ID)
    return ids


# ============================================
# DECODING
# ============================================

@dataclass
class _TableDraft:
    caption: Optional[str]
    rows: List[LinearizedRow]


def _split_lines(ids: Sequence[int]) -> List[List[int]]:
    lines: List[List[int]] = [[]]
    for token in ids:
        if token == NEWLINE_ID:
            lines.append([])
        else:
            lines[-1].append(token)
    return lines


def _parse_row(v: Vocab, line: Sequence[int]) -> Tuple[LinearizedRow, bool]:
    """
    Parse a line that starts with <s>.

    Returns:
        The row and whether it followed the grammar exactly. Tokens after the
        last <s> are folded into the last cell.
    """
    cells: List[List[int]] = []
    current: List[int] = []
    for token in line[1:]:
        if token == SEP_ID:
            cells.append(current)
            current = []
        else:
            current.append(token)

    ok = True
    if current:
        ok = False
        if cells:
            cells[-1].extend(current)
        else:
            cells.append(current)
    if not cells:
        # a lone <s> carries no cell
        ok = False
        cells.append([])
    return LinearizedRow(cells=tuple(decode_text(v, c) for c in cells)), ok


def repair(rows: Sequence[LinearizedRow], header_mode: HeaderMode = HeaderMode.BOTH,
           caption: Optional[str] = None) -> Table:
    """
    Force rows into a rectangular table.

    The first row defines the column count; later rows are truncated or
    right-padded with empty cells to match.
    """
    if not rows:
        raise ValueError("repair() needs at least one row.")
    n_cols = max(1, len(rows[0].cells))
    fixed = []
    for row in rows:
        cells = list(row.cells[:n_cols])
        cells.extend([""] * (n_cols - len(cells)))
        fixed.append(cells)
    return Table.from_rows(fixed, header_mode=header_mode, caption=caption)


def decode_sequence(v: Vocab, ts: Sequence[int],
                    header_mode: HeaderMode = HeaderMode.BOTH) -> DecodeResult:
    """
    Parse a token sequence into a document.

    Args:
        v: Vocabulary the ids belong to
        ts: Token ids beginning with <bos>
        header_mode: Header mode given to every decoded table

    Returns:
        DecodeResult; malformed input yields the repaired document.

    Raises:
        MalformedSequenceError: If the sequence is empty or lacks the leading <bos>.
        EmptyOutputError: If the sequence contains no row at all.
    """
    if not ts or ts[0] != BOS_ID:
        raise MalformedSequenceError("Token sequence must begin with <bos>.")

    body: List[int] = []
    well_formed = True
    for token in ts[1:]:
        if token == EOS_ID:
            break
        if token in (PAD_ID, BOS_ID):
            well_formed = False
            continue
        body.append(token)

    drafts: List[_TableDraft] = []
    for line in _split_lines(body):
        if not line:
            well_formed = False
            continue
        if line[0] != SEP_ID:
            # caption line; any <s> in it starts a row of the new table
            split = line.index(SEP_ID) if SEP_ID in line else len(line)
            drafts.append(_TableDraft(caption=decode_text(v, line[:split]), rows=[]))
            if split < len(line):
                well_formed = False
                line = line[split:]
            else:
                continue
        if not drafts:
            drafts.append(_TableDraft(caption=None, rows=[]))
        row, ok = _parse_row(v, line)
        well_formed = well_formed and ok
        drafts[-1].rows.append(row)

    kept: List[_TableDraft] = []
    for draft in drafts:
        if not draft.rows:
            well_formed = False
            continue
        kept.append(draft)
    if not kept:
        raise EmptyOutputError("Token sequence contains no table row.")

    # Multi-table documents need distinct captions on every table.
    if len(kept) > 1:
        seen: set = set()
        unique: List[_TableDraft] = []
        for draft in kept:
            if draft.caption is None or draft.caption in seen:
                well_formed = False
                continue
            seen.add(draft.caption)
            unique.append(draft)
        kept = unique

    tables = []
    for draft in kept:
        n_cols = len(draft.rows[0].cells)
        if any(len(row.cells) != n_cols for row in draft.rows):
            well_formed = False
        tables.append(repair(draft.rows, header_mode=header_mode, caption=draft.caption))

    return DecodeResult(document=Document(tables=tuple(tables)), well_formed=well_formed)


def decode_or_placeholder(v: Vocab, ts: Sequence[int],
                          header_mode: HeaderMode = HeaderMode.BOTH) -> DecodeResult:
    """decode_sequence, mapping output without any row to a malformed placeholder."""
    try:
        return decode_sequence(v, ts, header_mode)
    except EmptyOutputError:
        return DecodeResult(document=Document.placeholder(header_mode), well_formed=False)
