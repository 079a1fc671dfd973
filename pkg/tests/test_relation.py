# TableGen Relation Tests
"""
Unit tests for row/column header relations over target positions.
"""

import random

import pytest

from src.errors import MalformedSequenceError
from src.tables.codec import encode_document
from src.tables.relation import (
    RelationLabel,
    initial_relation_state,
    relation_step,
    relations_full,
)
from src.tables.table import Document, HeaderMode, Table
from src.text.vocab import BOS_ID, EOS_ID, NEWLINE_ID, SEP_ID
from tests.conftest import random_document

R = RelationLabel.ROW_HEADER
C = RelationLabel.COL_HEADER


def label_at(matrix, i, j):
    return matrix.labels.get((i, j), RelationLabel.NONE)


def labels_from(matrix, i):
    return sorted((j, label) for (a, j), label in matrix.labels.items() if a == i)


def labels_within(matrix, length):
    return {(i, j): label for (i, j), label in matrix.labels.items() if i < length and j < length}


def grid_oracle(ts, mode):
    """
    Independent reference: map every cell token and closing <s> to its
    (table, row, column), then look headers up in that grid.
    """
    words = {}
    owner = {}
    table = row = col = 0
    line_start, in_caption = True, False
    for p in range(1, len(ts)):
        token = ts[p]
        if token == EOS_ID:
            break
        if token == NEWLINE_ID:
            line_start = True
            continue
        if line_start:
            line_start = False
            in_caption = token != SEP_ID
            if in_caption:
                table, row = table + 1, 0
            else:
                row, col = row + 1, 1
            continue
        if in_caption:
            continue
        owner[p] = (table, row, col)
        if token == SEP_ID:
            col += 1
        else:
            words.setdefault((table, row, col), []).append(p)

    labels = {}
    for p, (t, r, c) in owner.items():
        if mode is HeaderMode.BOTH:
            target = r >= 2 and c >= 2
        elif mode is HeaderMode.COL_ONLY:
            target = r >= 2
        else:
            target = c >= 2
        if not target:
            continue
        if mode.has_row_headers:
            labels.update({(p, j): R for j in words.get((t, r, 1), [])})
        if mode.has_col_headers:
            labels.update({(p, j): C for j in words.get((t, 1, c), [])})
    return labels


def incremental_labels(ts, mode):
    """Replay a sequence through relation_step, collecting every label."""
    state = initial_relation_state(mode)
    labels = {}
    for position in range(1, len(ts)):
        state, produced = relation_step(state, ts[position], position)
        for j, label in produced:
            labels[(position, j)] = label
    return labels


# ============================================
# FULL PARSE TESTS
# ============================================

class TestRelationsFull:
    """Tests for relations_full."""

    def test_player_slice(self, vocab, player_slice):
        """
        Positions: 0 <bos>, 1 <s>, 2 <s>, 3 Assists, 4 <s>, 5 <n>, 6 <s>,
        7 Al, 8 Horford, 9 <s>, 10 "5", 11 <s>, 12 <eos>.
        """
        ts = encode_document(vocab, Document.of(player_slice))
        matrix = relations_full(ts, HeaderMode.BOTH)
        expected = {}
        for i in (10, 11):
            expected.update({(i, 7): R, (i, 8): R, (i, 3): C})
        assert matrix.labels == expected

    def test_matches_grid_oracle(self, vocab):
        """Well-formed sequences up to 6x6 agree with the grid lookup."""
        rng = random.Random(13)
        for _ in range(300):
            d = random_document(rng, max_rows=6, max_cols=6)
            mode = d.tables[0].header_mode
            ts = encode_document(vocab, d)
            assert relations_full(ts, mode).labels == grid_oracle(ts, mode)

    def test_single_cell_has_no_targets(self, vocab):
        ts = encode_document(vocab, Document.of(Table.from_rows([["x"]])))
        for mode in HeaderMode:
            assert relations_full(ts, mode).labels == {}

    def test_header_cells_get_no_labels(self, vocab, player_slice):
        ts = encode_document(vocab, Document.of(player_slice))
        matrix = relations_full(ts, HeaderMode.BOTH)
        for i in range(10):
            assert labels_from(matrix, i) == []

    def test_col_only_labels_first_column(self, vocab):
        """ColOnly: only column-header labels, the first column included."""
        t = Table.from_rows([["a", "b"], ["c", "x"]], HeaderMode.COL_ONLY)
        ts = encode_document(vocab, Document.of(t))
        # 0 <bos> 1 <s> 2 a 3 <s> 4 b 5 <s> 6 <n> 7 <s> 8 c 9 <s> 10 x 11 <s> 12 <eos>
        matrix = relations_full(ts, HeaderMode.COL_ONLY)
        assert label_at(matrix, 8, 2) is C
        assert label_at(matrix, 10, 4) is C
        assert label_at(matrix, 10, 8) is RelationLabel.NONE

    def test_row_only_has_no_column_labels(self, vocab):
        t = Table.from_rows([["a", "b"], ["c", "x"]], HeaderMode.ROW_ONLY)
        ts = encode_document(vocab, Document.of(t))
        matrix = relations_full(ts, HeaderMode.ROW_ONLY)
        assert label_at(matrix, 4, 2) is R
        assert label_at(matrix, 10, 8) is R
        assert C not in matrix.labels.values()

    def test_caption_resets_headers(self, vocab):
        """The second table's cells only see the second table's headers."""
        d = Document.of(
            Table.from_rows([["", "a"], ["b", "c"]], caption="Team"),
            Table.from_rows([["", "x"], ["Al", "5"]], caption="Player"),
        )
        ts = encode_document(vocab, d)
        matrix = relations_full(ts, HeaderMode.BOTH)
        five = ts.index(vocab.id_of["5"])
        assert {j for j, _ in labels_from(matrix, five)} == {ts.index(vocab.id_of["Al"]), ts.index(vocab.id_of["x"])}

    def test_empty_header_cell_gives_no_labels(self, vocab):
        """An empty corner or header contributes nothing."""
        t = Table.from_rows([["", ""], ["", "x"]])
        ts = encode_document(vocab, Document.of(t))
        assert relations_full(ts, HeaderMode.BOTH).labels == {}

    def test_lower_triangular(self, vocab):
        """Every labelled pair points backwards."""
        rng = random.Random(5)
        for _ in range(200):
            d = random_document(rng)
            ts = encode_document(vocab, d)
            for (i, j) in relations_full(ts, d.tables[0].header_mode).labels:
                assert j < i

    def test_requires_bos(self):
        with pytest.raises(MalformedSequenceError):
            relations_full([SEP_ID, EOS_ID], HeaderMode.BOTH)


# ============================================
# INCREMENTAL PARSE TESTS
# ============================================

class TestRelationStep:
    """Tests for relation_step against the full parse."""

    def test_matches_full_parse_fuzz(self, vocab):
        """Incremental labels equal the full parse for random documents."""
        rng = random.Random(17)
        for _ in range(500):
            d = random_document(rng)
            mode = d.tables[0].header_mode
            ts = encode_document(vocab, d)
            assert incremental_labels(ts, mode) == relations_full(ts, mode).labels

    def test_prefixes_agree(self, vocab):
        """Labels among the first k positions do not depend on later tokens."""
        rng = random.Random(19)
        for _ in range(100):
            d = random_document(rng, max_rows=4, max_cols=4)
            mode = d.tables[0].header_mode
            ts = encode_document(vocab, d)
            full = relations_full(ts, mode)
            for k in range(1, len(ts) + 1):
                assert relations_full(ts[:k], mode).labels == labels_within(full, k)

    def test_malformed_sequences_agree(self, vocab):
        """Both parsers agree on arbitrary token streams too."""
        rng = random.Random(23)
        symbols = [SEP_ID, SEP_ID, NEWLINE_ID] + list(range(6, len(vocab)))
        for _ in range(500):
            ts = [BOS_ID] + [rng.choice(symbols) for _ in range(rng.randint(0, 40))] + [EOS_ID]
            mode = rng.choice(list(HeaderMode))
            assert incremental_labels(ts, mode) == relations_full(ts, mode).labels

    def test_step_leaves_input_state_untouched(self, vocab):
        state = initial_relation_state(HeaderMode.BOTH)
        after, _ = relation_step(state, SEP_ID, 1)
        assert state.at_line_start and not after.at_line_start

    def test_nothing_after_eos(self):
        state = initial_relation_state(HeaderMode.BOTH)
        state, _ = relation_step(state, EOS_ID, 1)
        _, labels = relation_step(state, SEP_ID, 2)
        assert labels == []
