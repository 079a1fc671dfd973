# TableGen Data Tests
"""
Unit tests for synthetic corpora and JSONL dataset files.
"""

import json
from dataclasses import replace

import pytest

from src.data.dataset import (
    DatasetRecord,
    Prediction,
    corpus_stats,
    filter_unsupported_cells,
    first_header_mode,
    load_dataset,
    load_predictions,
    read_jsonl,
    save_dataset,
    save_predictions,
    serialized_length,
    split_records,
)
from src.data.synth import TEAMS, SynthConfig, generate_corpus
from src.errors import DatasetIOError, DatasetParseError
from src.tables.codec import encode_document
from src.tables.table import HeaderMode, Table, non_header_cells, validate_document
from src.text.vocab import build_vocab


# ============================================
# SYNTHETIC CORPUS TESTS
# ============================================

class TestGenerateCorpus:
    """Tests for generate_corpus."""

    def test_same_seed_same_corpus(self, tmp_path):
        cfg = SynthConfig(n_examples=50, seed=3)
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_dataset(generate_corpus(cfg), first)
        save_dataset(generate_corpus(cfg), second)
        assert first.read_bytes() == second.read_bytes()

    def test_different_seed_differs(self):
        a = generate_corpus(SynthConfig(n_examples=20, seed=1))
        b = generate_corpus(SynthConfig(n_examples=20, seed=2))
        assert a != b

    def test_game_records_are_valid(self):
        for record in generate_corpus(SynthConfig(n_examples=200, seed=5)):
            assert validate_document(record.document()) == []
            assert [t.caption for t in record.tables] == ["Team", "Player"]
            assert all(t.header_mode is HeaderMode.BOTH for t in record.tables)

    def test_omission_rate(self):
        """Empty non-header cells track the omission rate."""
        records = generate_corpus(SynthConfig(n_examples=2000, omission_rate=0.2, seed=9))
        total = empty = 0
        for record in records:
            for t in record.tables:
                for i, j in non_header_cells(t):
                    total += 1
                    empty += t.cell(i, j) == ""
        assert total > 10000
        assert abs(empty / total - 0.2) <= 0.01

    def test_tables_keep_canonical_names(self):
        """City aliases appear only in the text; the Team table uses team names."""
        canonical = {name for _, name in TEAMS}
        records = generate_corpus(SynthConfig(n_examples=100, synonym_rate=1.0, omission_rate=0.0, seed=4))
        for record in records:
            team = record.tables[0]
            rows = [team.cell(i, 1) for i in range(2, team.n_rows + 1)]
            assert set(rows) <= canonical
            aliases = [city for city, name in TEAMS if name in rows]
            assert all(city in record.text.split() for city in aliases)

    def test_no_omissions_means_full_tables(self):
        records = generate_corpus(SynthConfig(n_examples=50, omission_rate=0.0, seed=6))
        for record in records:
            for t in record.tables:
                assert all(t.cell(i, j) for i, j in non_header_cells(t))

    def test_profile_domain(self):
        records = generate_corpus(SynthConfig(n_examples=100, domain="profile", seed=8))
        for record in records:
            (t,) = record.tables
            assert t.header_mode is HeaderMode.COL_ONLY
            assert t.caption is None
            assert t.rows[0] == ("attribute", "value")
            assert t.cell(2, 1) == "name"
            assert validate_document(record.document()) == []

    def test_profile_omission_drops_rows(self):
        records = generate_corpus(SynthConfig(n_examples=50, domain="profile", omission_rate=1.0, seed=8))
        assert all(r.tables[0].n_rows == 2 for r in records)

    def test_corpus_encodes(self):
        records = generate_corpus(SynthConfig(n_examples=30, seed=11))
        vocab = build_vocab([r.text for r in records])
        for record in records:
            ts = encode_document(vocab, record.document())
            assert len(ts) == serialized_length(record.document())

    @pytest.mark.parametrize("field, value", [
        ("omission_rate", 1.5),
        ("domain", "weather"),
        ("n_entities_range", (3, 2)),
        ("n_stat_types_range", (0, 2)),
    ])
    def test_invalid_config(self, field, value):
        with pytest.raises(ValueError):
            generate_corpus(replace(SynthConfig(n_examples=1), **{field: value}))


# ============================================
# FILE TESTS
# ============================================

class TestDatasetFiles:
    """Tests for dataset and prediction JSONL files."""

    def test_round_trip(self, tmp_path, records):
        path = tmp_path / "data.jsonl"
        save_dataset(records, path)
        assert load_dataset(path) == records

    def test_line_schema(self, tmp_path, records):
        path = tmp_path / "data.jsonl"
        save_dataset(records[:1], path)
        obj = json.loads(path.read_text(encoding="utf-8"))
        assert obj == {
            "text": "Al Horford had 5 Assists",
            "tables": [{"caption": None, "header_mode": "both",
                        "rows": [["", "Assists"], ["Al Horford", "5"]]}],
        }

    def test_parse_error_names_the_line(self, tmp_path):
        path = tmp_path / "data.jsonl"
        good = json.dumps({"text": "a", "tables": [{"rows": [["a"]]}]})
        path.write_text(f"{good}\n\n{{broken\n", encoding="utf-8")
        with pytest.raises(DatasetParseError) as info:
            load_dataset(path)
        assert info.value.line == 3

    def test_schema_error(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text(json.dumps({"text": "a", "tables": [{"rows": [["a", "b"], ["c"]]}]}) + "\n",
                        encoding="utf-8")
        with pytest.raises(DatasetParseError, match="non_rectangular"):
            load_dataset(path)

    def test_unknown_header_mode(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text(json.dumps({"text": "a", "tables": [{"header_mode": "diag", "rows": [["a"]]}]}),
                        encoding="utf-8")
        with pytest.raises(DatasetParseError):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetIOError):
            load_dataset(tmp_path / "absent.jsonl")

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "rows.jsonl"
        path.write_text('{"a": 1}\n\n  \n{"a": 2}\n', encoding="utf-8")
        assert read_jsonl(path) == [(1, {"a": 1}), (4, {"a": 2})]

    def test_predictions_round_trip(self, tmp_path, player_slice):
        path = tmp_path / "pred.jsonl"
        preds = [Prediction(tokens=("<bos>", "<s>", "x", "<s>", "<eos>"), well_formed=True,
                            tables=(player_slice,))]
        save_predictions(preds, path)
        assert load_predictions(path) == preds

    def test_prediction_needs_verdict(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        path.write_text(json.dumps({"tokens": [], "tables": []}) + "\n", encoding="utf-8")
        with pytest.raises(DatasetParseError, match="well_formed"):
            load_predictions(path)


# ============================================
# PREPARATION TESTS
# ============================================

class TestPreparation:
    """Tests for filtering, statistics and splitting."""

    def test_filter_blanks_unsupported_cells(self):
        t = Table.from_rows([["", "Points", "Assists"], ["Al Horford", "5", "7"]])
        record = DatasetRecord("Al Horford had 5 points", (t,))
        filtered = filter_unsupported_cells(record)
        assert filtered.tables[0].to_lists() == [["", "Points", "Assists"], ["Al Horford", "5", ""]]

    def test_filter_matches_whole_spans(self):
        t = Table.from_rows([["", "near"], ["x", "Cafe Rouge"], ["y", "Rouge Cafe"]])
        filtered = filter_unsupported_cells(DatasetRecord("It is near Cafe Rouge .", (t,)))
        assert filtered.tables[0].cell(2, 2) == "Cafe Rouge"
        assert filtered.tables[0].cell(3, 2) == ""

    def test_corpus_stats(self, records):
        stats = corpus_stats(records)
        assert stats.n_instances == 3
        assert stats.mean_text_tokens == pytest.approx(13 / 3)
        assert stats.mean_target_tokens == pytest.approx(37 / 3)
        pool = stats.pools["table"]
        assert (pool.n_tables, pool.mean_rows, pool.mean_cols) == (3, 2.0, 2.0)
        assert (pool.n_cells, pool.n_nonempty) == (3, 3)
        assert pool.nonempty_ratio == 1.0

    def test_stats_of_nothing(self):
        stats = corpus_stats([])
        assert stats.n_instances == 0 and stats.pools == {}

    def test_split(self, records):
        train, valid = split_records(records, 1 / 3)
        assert train == records[:2] and valid == records[2:]
        assert split_records(records, 0.0) == (records, [])
        with pytest.raises(ValueError):
            split_records(records, 1.0)

    def test_first_header_mode(self, records):
        assert first_header_mode(records) is HeaderMode.BOTH
        assert first_header_mode([]) is None
