# TableGen Table Tests
"""
Unit tests for the table model and the table codec.
"""

import random

import pytest

from src.errors import (
    CellIndexError,
    DataError,
    EmptyOutputError,
    HeaderRequestError,
    InvalidDocumentError,
    MalformedSequenceError,
)
from src.tables.codec import LinearizedRow, decode_or_placeholder, decode_sequence, encode_document, repair
from src.tables.table import (
    Document,
    HeaderMode,
    Table,
    ViolationKind,
    header_of,
    non_header_cells,
    validate_document,
    validate_table,
)
from src.text.vocab import BOS_ID, EOS_ID, NEWLINE_ID, SEP_ID
from tests.conftest import fuzz_documents


def ids(vocab, *words):
    return [vocab.id_of[w] for w in words]


# ============================================
# TABLE MODEL TESTS
# ============================================

class TestValidateTable:
    """Tests for validate_table and validate_document."""

    def test_rectangular_table_is_valid(self, player_slice):
        """A 2x2 Both-mode table has no violations."""
        assert validate_table(player_slice) == []

    def test_ragged_rows(self):
        """Rows of lengths [3, 2] break rectangularity at row 2."""
        t = Table.from_rows([["a", "b", "c"], ["a", "b"]])
        violations = validate_table(t)
        assert [(v.kind, v.row) for v in violations] == [(ViolationKind.NON_RECTANGULAR, 2)]

    def test_special_symbol_in_cell(self):
        """A cell holding <n> is reported with its address."""
        t = Table.from_rows([["x <n> y"]])
        violations = validate_table(t)
        assert [(v.kind, v.row, v.col) for v in violations] == [
            (ViolationKind.SPECIAL_SYMBOL_IN_CELL, 1, 1)
        ]

    def test_empty_table(self):
        """No rows is a violation."""
        assert validate_table(Table(rows=()))[0].kind is ViolationKind.EMPTY_TABLE

    def test_invalid_caption(self):
        """Captions may not contain special symbols."""
        t = Table.from_rows([["a"]], caption="Team <s>")
        assert [v.kind for v in validate_table(t)] == [ViolationKind.INVALID_CAPTION]

    def test_validation_is_pure(self):
        """Repeated calls return identical results."""
        t = Table.from_rows([["a", "b"], ["c"]])
        assert validate_table(t) == validate_table(t)

    def test_multi_table_needs_distinct_captions(self):
        """Several tables need a caption each, all different."""
        a = Table.from_rows([["a"]], caption="Team")
        b = Table.from_rows([["b"]])
        c = Table.from_rows([["c"]], caption="Team")
        kinds = [v.kind for v in validate_document(Document.of(a, b, c))]
        assert kinds == [ViolationKind.MISSING_CAPTION, ViolationKind.DUPLICATE_CAPTION]

    def test_empty_document(self):
        assert validate_document(Document())[0].kind is ViolationKind.EMPTY_DOCUMENT

    def test_whitespace_is_normalized(self):
        """Cells are trimmed and internal runs collapse to one space."""
        t = Table.from_rows([["  Al   Horford "]])
        assert t.cell(1, 1) == "Al Horford"


class TestHeaderOf:
    """Tests for header_of."""

    def test_both_mode(self, player_slice):
        """Cell (2, 2) of the player slice is keyed by Al Horford / Assists."""
        assert header_of(player_slice, 2, 2) == ("Al Horford", "Assists")

    def test_col_only_uses_first_column_as_row_key(self):
        t = Table.from_rows([["attribute", "value"], ["food", "Italian"]], HeaderMode.COL_ONLY)
        assert header_of(t, 2, 2) == ("food", "value")

    def test_row_only_uses_column_number(self):
        t = Table.from_rows([["name", "Zizzi"], ["food", "Italian"]], HeaderMode.ROW_ONLY)
        assert header_of(t, 2, 2) == ("food", "2")

    def test_header_cell_request(self, player_slice):
        with pytest.raises(HeaderRequestError):
            header_of(player_slice, 1, 2)

    def test_out_of_range(self, player_slice):
        with pytest.raises(CellIndexError):
            header_of(player_slice, 3, 2)
        with pytest.raises(IndexError):
            player_slice.cell(0, 1)

    def test_non_header_cells_per_mode(self):
        """3x3 tables: Both leaves 4 cells, ColOnly 6, RowOnly 6."""
        rows = [["a"] * 3] * 3
        assert len(non_header_cells(Table.from_rows(rows, HeaderMode.BOTH))) == 4
        assert len(non_header_cells(Table.from_rows(rows, HeaderMode.COL_ONLY))) == 6
        assert len(non_header_cells(Table.from_rows(rows, HeaderMode.ROW_ONLY))) == 6


# ============================================
# CODEC TESTS
# ============================================

class TestEncodeDocument:
    """Tests for encode_document."""

    def test_player_slice(self, vocab, player_slice):
        """Corner, Assists / Al Horford, 5 serialize row by row."""
        expected = (
            [BOS_ID, SEP_ID, SEP_ID] + ids(vocab, "Assists") + [SEP_ID, NEWLINE_ID, SEP_ID]
            + ids(vocab, "Al", "Horford") + [SEP_ID] + ids(vocab, "5") + [SEP_ID, EOS_ID]
        )
        assert encode_document(vocab, Document.of(player_slice)) == expected

    def test_single_cell(self, vocab):
        t = Table.from_rows([["x"]])
        assert encode_document(vocab, Document.of(t)) == [BOS_ID, SEP_ID, vocab.id_of["x"], SEP_ID, EOS_ID]

    def test_captioned_tables(self, vocab):
        """Caption lines precede their tables; tables are joined by one <n>."""
        d = Document.of(
            Table.from_rows([["a"]], caption="Team"),
            Table.from_rows([["b"]], caption="Player"),
        )
        expected = (
            [BOS_ID] + ids(vocab, "Team") + [NEWLINE_ID, SEP_ID] + ids(vocab, "a") + [SEP_ID, NEWLINE_ID]
            + ids(vocab, "Player") + [NEWLINE_ID, SEP_ID] + ids(vocab, "b") + [SEP_ID, EOS_ID]
        )
        assert encode_document(vocab, d) == expected

    def test_invalid_document_raises(self, vocab):
        """Violations travel with the error."""
        with pytest.raises(InvalidDocumentError) as info:
            encode_document(vocab, Document.of(Table.from_rows([["a", "b"], ["c"]])))
        assert info.value.violations[0].kind is ViolationKind.NON_RECTANGULAR


class TestDecodeSequence:
    """Tests for decode_sequence."""

    def test_round_trip_fuzz(self, vocab):
        """Random valid documents come back unchanged and well formed."""
        for d in fuzz_documents():
            mode = d.tables[0].header_mode
            result = decode_sequence(vocab, encode_document(vocab, d), mode)
            assert result.well_formed
            assert result.document == d

    def test_ragged_rows_are_malformed(self, vocab):
        """Row 2 has one cell where row 1 has two."""
        a, b, c = ids(vocab, "a", "b", "c")
        ts = [BOS_ID, SEP_ID, a, SEP_ID, b, SEP_ID, NEWLINE_ID, SEP_ID, c, SEP_ID, EOS_ID]
        result = decode_sequence(vocab, ts)
        assert not result.well_formed
        assert result.document.tables[0].to_lists() == [["a", "b"], ["c", ""]]

    def test_dangling_tokens_fold_into_last_cell(self, vocab):
        """Words after a row's closing <s> join its last cell."""
        a, b, c = ids(vocab, "a", "b", "c")
        ts = [BOS_ID, SEP_ID, a, SEP_ID, b, SEP_ID, c, NEWLINE_ID, SEP_ID, a, SEP_ID, b, SEP_ID, EOS_ID]
        result = decode_sequence(vocab, ts)
        assert not result.well_formed
        assert result.document.tables[0].to_lists() == [["a", "b c"], ["a", "b"]]

    def test_lone_separator_row_is_malformed(self, vocab):
        """<s> <n> would be a first row without cells."""
        ts = [BOS_ID, SEP_ID, NEWLINE_ID, SEP_ID, vocab.id_of["a"], SEP_ID, EOS_ID]
        result = decode_sequence(vocab, ts)
        assert not result.well_formed
        assert validate_document(result.document) == []

    def test_no_rows_raises(self, vocab):
        with pytest.raises(EmptyOutputError):
            decode_sequence(vocab, [BOS_ID, vocab.id_of["Team"], EOS_ID])

    def test_placeholder_for_empty_output(self, vocab):
        """decode_or_placeholder maps row-less output to a 1x1 malformed document."""
        result = decode_or_placeholder(vocab, [BOS_ID, EOS_ID], HeaderMode.COL_ONLY)
        assert not result.well_formed
        assert result.document == Document.placeholder(HeaderMode.COL_ONLY)

    def test_duplicate_caption_is_dropped(self, vocab):
        """A repeated caption makes the output malformed; the repeat is discarded."""
        team, a, b = ids(vocab, "Team", "a", "b")
        ts = [BOS_ID, team, NEWLINE_ID, SEP_ID, a, SEP_ID, NEWLINE_ID,
              team, NEWLINE_ID, SEP_ID, b, SEP_ID, EOS_ID]
        result = decode_sequence(vocab, ts)
        assert not result.well_formed
        assert [t.caption for t in result.document.tables] == ["Team"]

    def test_never_aborts_with_a_separator(self, vocab):
        """Any <bos>-prefixed sequence with a <s> decodes to a valid document."""
        rng = random.Random(11)
        non_eos = [i for i in range(len(vocab)) if i != EOS_ID]
        for _ in range(3000):
            body = [rng.choice(non_eos) for _ in range(rng.randint(0, 30))]
            ts = [BOS_ID] + body + [SEP_ID] + [rng.randrange(len(vocab)) for _ in range(3)]
            result = decode_sequence(vocab, ts, rng.choice(list(HeaderMode)))
            assert validate_document(result.document) == []

    def test_requires_bos(self, vocab):
        with pytest.raises(MalformedSequenceError):
            decode_sequence(vocab, [SEP_ID, EOS_ID])
        with pytest.raises(DataError):
            decode_or_placeholder(vocab, [])


class TestRepair:
    """Tests for repair."""

    def test_first_row_defines_width(self):
        """Cell counts [3, 4, 2] become 3 everywhere."""
        rows = [LinearizedRow(("a", "b", "c")), LinearizedRow(("d", "e", "f", "g")), LinearizedRow(("h", "i"))]
        t = repair(rows)
        assert t.to_lists() == [["a", "b", "c"], ["d", "e", "f"], ["h", "i", ""]]
        assert validate_table(t) == []

    def test_identity_on_rectangular_rows(self):
        rows = [LinearizedRow(("a", "b")), LinearizedRow(("c", "d"))]
        assert repair(rows).to_lists() == [["a", "b"], ["c", "d"]]

    def test_single_row(self):
        rows = [LinearizedRow(("a", "b", "c", "x", "5"))]
        assert repair(rows).n_cols == 5

    def test_idempotent(self):
        rows = [LinearizedRow(("a", "b")), LinearizedRow(("c",)), LinearizedRow(("d", "e", "f"))]
        once = repair(rows)
        twice = repair([LinearizedRow(r) for r in once.rows])
        assert once == twice
