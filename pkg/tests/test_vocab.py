# TableGen Vocabulary Tests
"""
Unit tests for the word-level vocabulary.
"""

import random

import pytest

from src.errors import EmptyCorpusError, UnknownIdError, VocabFormatError
from src.text.vocab import (
    NUM_SPECIALS,
    SPECIAL_TOKENS,
    UNK_ID,
    Vocab,
    build_vocab,
    decode_text,
    encode_text,
)
from tests.conftest import WORDS


class TestBuildVocab:
    """Tests for build_vocab."""

    def test_specials_come_first(self):
        v = build_vocab(["a a b"])
        assert v.tokens[:NUM_SPECIALS] == SPECIAL_TOKENS
        assert v.id_of["<pad>"] == 0 and v.id_of["<n>"] == 5

    def test_frequency_then_lexicographic_order(self):
        """"a a b" gives a -> 6, b -> 7."""
        v = build_vocab(["a a b"])
        assert v.id_of["a"] == 6
        assert v.id_of["b"] == 7
        assert len(v) == NUM_SPECIALS + 2

    def test_min_freq(self):
        v = build_vocab(["a a b"], min_freq=2)
        assert "b" not in v.id_of
        assert len(v) == NUM_SPECIALS + 1

    def test_deterministic_ids(self):
        """Equal counts tie-break lexicographically, so rebuilds agree."""
        first = build_vocab(["x y", "y x"])
        second = build_vocab(["y x", "x y"])
        assert first.tokens == second.tokens
        assert first.id_of["x"] < first.id_of["y"]

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            build_vocab(["", "   "])

    def test_special_surface_forms_are_not_words(self):
        v = build_vocab(["<s> a <n>"])
        assert v.tokens == SPECIAL_TOKENS + ("a",)

    def test_invalid_min_freq(self):
        with pytest.raises(ValueError):
            build_vocab(["a"], min_freq=0)


class TestEncodeDecode:
    """Tests for encode_text and decode_text."""

    def test_round_trip(self):
        v = build_vocab(["a a b"])
        assert encode_text(v, "a b") == [6, 7]
        assert decode_text(v, [6, 7]) == "a b"

    def test_unknown_word(self):
        v = build_vocab(["a a b"])
        assert encode_text(v, "a zzz") == [6, UNK_ID]

    def test_empty_string(self):
        v = build_vocab(["a"])
        assert encode_text(v, "") == []
        assert decode_text(v, []) == ""

    def test_specials_never_encoded_from_text(self, vocab):
        """Raw "<s>" or "<eos>" in text become <unk>."""
        assert encode_text(vocab, "<s> <eos> <bos> <n>") == [UNK_ID] * 4

    def test_unknown_id(self, vocab):
        with pytest.raises(UnknownIdError):
            decode_text(vocab, [len(vocab)])

    def test_round_trip_fuzz(self, vocab):
        """Whitespace-normalized in-vocabulary strings survive encode/decode."""
        rng = random.Random(3)
        for _ in range(1000):
            s = " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 12)))
            assert decode_text(vocab, encode_text(vocab, s)) == s

    def test_mutual_inverse(self, vocab):
        for token, token_id in vocab.id_of.items():
            assert vocab.token_of[token_id] == token


class TestPersistence:
    """Tests for Vocab.save and Vocab.load."""

    def test_save_load(self, tmp_path, vocab):
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        assert path.read_text(encoding="utf-8").split("\n")[:NUM_SPECIALS] == list(SPECIAL_TOKENS)
        assert Vocab.load(path) == vocab

    def test_bad_header(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("a\nb\n", encoding="utf-8")
        with pytest.raises(VocabFormatError):
            Vocab.load(path)

    def test_duplicates_rejected(self):
        with pytest.raises(VocabFormatError):
            Vocab(tokens=SPECIAL_TOKENS + ("a", "a"))
