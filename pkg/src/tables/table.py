# TableGen Table Model
"""
Tables and multi-table documents, with validation.

Rows and columns are addressed 1-based, so cell (1, 1) is the top-left
corner exactly as in the usual t_{i,j} notation.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Final, Iterable, List, Optional, Sequence, Tuple

from ..errors import CellIndexError, HeaderRequestError


# Surface forms a cell or caption may not contain.
SEPARATOR_SYMBOL: Final[str] = "<s>"
NEWLINE_SYMBOL: Final[str] = "<n>"
RESERVED_CELL_SYMBOLS: Final[Tuple[str, ...]] = (SEPARATOR_SYMBOL, NEWLINE_SYMBOL)


class HeaderMode(Enum):
    """Which edges of a table are headers. Values are the JSONL spellings."""

    BOTH = "both"
    COL_ONLY = "col"
    ROW_ONLY = "row"

    @property
    def has_col_headers(self) -> bool:
        return self is not HeaderMode.ROW_ONLY

    @property
    def has_row_headers(self) -> bool:
        return self is not HeaderMode.COL_ONLY


def normalize_cell(text: str) -> str:
    """Collapse internal whitespace to single spaces and trim both ends."""
    return " ".join(text.split())


Row = Tuple[str, ...]


@dataclass(frozen=True)
class Table:
    """
    A grid of string cells. The empty string denotes an empty cell.

    Construction normalizes whitespace but does not validate; use
    validate_table() to check the invariants.
    """

    rows: Tuple[Row, ...]
    header_mode: HeaderMode = HeaderMode.BOTH
    caption: Optional[str] = None

    @staticmethod
    def from_rows(
        rows: Iterable[Iterable[str]],
        header_mode: HeaderMode = HeaderMode.BOTH,
        caption: Optional[str] = None,
    ) -> "Table":
        """Build a table from nested iterables of strings."""
        normalized = tuple(tuple(normalize_cell(c) for c in row) for row in rows)
        if caption is not None:
            caption = normalize_cell(caption)
        return Table(rows=normalized, header_mode=header_mode, caption=caption)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        """Column count, taken from the first row."""
        return len(self.rows[0]) if self.rows else 0

    def cell(self, row: int, col: int) -> str:
        """Content of cell (row, col), 1-based."""
        if not (1 <= row <= self.n_rows) or not (1 <= col <= len(self.rows[row - 1])):
            raise CellIndexError(
                f"Cell ({row}, {col}) is outside a {self.n_rows}x{self.n_cols} table."
            )
        return self.rows[row - 1][col - 1]

    def is_header_cell(self, row: int, col: int) -> bool:
        """Whether (row, col) is a header cell under this table's header mode."""
        if self.header_mode.has_col_headers and row == 1:
            return True
        return self.header_mode.has_row_headers and col == 1

    def to_lists(self) -> List[List[str]]:
        return [list(row) for row in self.rows]


@dataclass(frozen=True)
class Document:
    """One or more tables produced from a single text."""

    tables: Tuple[Table, ...] = field(default_factory=tuple)

    @staticmethod
    def of(*tables: Table) -> "Document":
        return Document(tables=tuple(tables))

    @staticmethod
    def placeholder(header_mode: HeaderMode = HeaderMode.BOTH) -> "Document":
        """Smallest valid document: one 1x1 table with an empty cell."""
        return Document(tables=(Table(rows=(("",),), header_mode=header_mode),))


# ============================================
# VALIDATION
# ============================================

class ViolationKind(Enum):
    """Reasons a table or document breaks its invariants."""

    # Table has no rows, or its first row has no cells
    EMPTY_TABLE = "empty_table"

    # A row has a different cell count than the first row
    NON_RECTANGULAR = "non_rectangular"

    # A cell contains a separation or new-line symbol
    SPECIAL_SYMBOL_IN_CELL = "special_symbol_in_cell"

    # Caption is empty or contains a special symbol
    INVALID_CAPTION = "invalid_caption"

    # Document has no tables
    EMPTY_DOCUMENT = "empty_document"

    # Multi-table document with an uncaptioned table
    MISSING_CAPTION = "missing_caption"

    # Multi-table document with a repeated caption
    DUPLICATE_CAPTION = "duplicate_caption"


@dataclass(frozen=True)
class Violation:
    """One broken invariant. Row/column numbers are 1-based; table is 0-based."""

    kind: ViolationKind
    row: Optional[int] = None
    col: Optional[int] = None
    table: Optional[int] = None

    def __str__(self) -> str:
        where = []
        if self.table is not None:
            where.append(f"table={self.table}")
        if self.row is not None:
            where.append(f"row={self.row}")
        if self.col is not None:
            where.append(f"col={self.col}")
        return f"{self.kind.value}({', '.join(where)})"


def _has_reserved_symbol(text: str) -> bool:
    return any(tok in RESERVED_CELL_SYMBOLS for tok in text.split())


def validate_table(t: Table) -> List[Violation]:
    """
    Check the table invariants.

    Returns:
        An empty list iff every invariant holds; otherwise one Violation per
        broken invariant.
    """
    violations: List[Violation] = []

    if t.n_rows == 0 or t.n_cols == 0:
        violations.append(Violation(ViolationKind.EMPTY_TABLE))

    n_cols = t.n_cols
    for i, row in enumerate(t.rows, start=1):
        if len(row) != n_cols:
            violations.append(Violation(ViolationKind.NON_RECTANGULAR, row=i))
        for j, content in enumerate(row, start=1):
            if _has_reserved_symbol(content):
                violations.append(Violation(ViolationKind.SPECIAL_SYMBOL_IN_CELL, row=i, col=j))

    if t.caption is not None and (not t.caption.strip() or _has_reserved_symbol(t.caption)):
        violations.append(Violation(ViolationKind.INVALID_CAPTION))

    return violations


def validate_document(d: Document) -> List[Violation]:
    """Check document invariants plus the invariants of every table in it."""
    if not d.tables:
        return [Violation(ViolationKind.EMPTY_DOCUMENT)]

    violations: List[Violation] = []
    seen: set = set()
    for index, table in enumerate(d.tables):
        for v in validate_table(table):
            violations.append(Violation(v.kind, row=v.row, col=v.col, table=index))
        if len(d.tables) > 1:
            if table.caption is None:
                violations.append(Violation(ViolationKind.MISSING_CAPTION, table=index))
            elif table.caption in seen:
                violations.append(Violation(ViolationKind.DUPLICATE_CAPTION, table=index))
            else:
                seen.add(table.caption)
    return violations


# ============================================
# HEADER LOOKUP
# ============================================

def header_of(t: Table, i: int, j: int) -> Tuple[str, str]:
    """
    Row key and column key of non-header cell (i, j).

    Tables without declared row headers use the first cell of the row as
    the row key. Tables without column headers use the column number.

    Raises:
        CellIndexError: (i, j) lies outside the table.
        HeaderRequestError: (i, j) is itself a header cell.
    """
    if not (1 <= i <= t.n_rows) or not (1 <= j <= t.n_cols):
        raise CellIndexError(f"Cell ({i}, {j}) is outside a {t.n_rows}x{t.n_cols} table.")
    if t.is_header_cell(i, j):
        raise HeaderRequestError(
            f"Cell ({i}, {j}) is a header cell under mode '{t.header_mode.value}'."
        )

    row_key = t.rows[i - 1][0]
    if t.header_mode.has_col_headers:
        col_key = t.rows[0][j - 1]
    else:
        col_key = str(j)
    return row_key, col_key


def non_header_cells(t: Table) -> Sequence[Tuple[int, int]]:
    """All (row, col) addresses that are not header cells, row-major."""
    return [
        (i, j)
        for i in range(1, t.n_rows + 1)
        for j in range(1, len(t.rows[i - 1]) + 1)
        if not t.is_header_cell(i, j)
    ]
