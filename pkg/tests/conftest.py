# TableGen Test Fixtures
"""
Shared fixtures and seeded random document builders.
"""

import random
from typing import Iterator, Optional, Sequence

import pytest
import torch

from src.data.dataset import DatasetRecord
from src.model.config import ModelConfig
from src.model.transformer import TableGenTransformer
from src.tables.table import Document, HeaderMode, Table
from src.text.vocab import SPECIAL_TOKENS, Vocab

WORDS = (
    "Assists", "Points", "Al", "Horford", "Team", "Player", "Celtics", "Heat",
    "5", "7", "10", "a", "b", "c", "x", "had",
)

# distinct as token sequences, all in WORDS
CAPTIONS = ("Team", "Player", "Points x", "a b", "Heat")


def tiny_config(vocab_size: int, **overrides) -> ModelConfig:
    """Smallest useful shape; dropout off so runs are deterministic."""
    fields = dict(d_model=8, n_heads=2, d_ff=16, n_enc_layers=1, n_dec_layers=1, max_len=32, dropout=0.0)
    fields.update(overrides)
    return ModelConfig(vocab_size=vocab_size, **fields)


def randomize_relations(model: TableGenTransformer, seed: int = 0) -> None:
    """Overwrite the zero-initialized relation vectors of every decoder layer."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for layer in model.decoder:
            for p in layer.relations.parameters():
                p.copy_(torch.randn(p.shape, generator=gen, dtype=p.dtype))


def random_table(
    rng: random.Random,
    mode: HeaderMode,
    caption: Optional[str] = None,
    max_rows: int = 8,
    max_cols: int = 8,
    words: Sequence[str] = WORDS,
) -> Table:
    n_rows, n_cols = rng.randint(1, max_rows), rng.randint(1, max_cols)
    rows = [
        [" ".join(rng.choice(words) for _ in range(rng.randint(0, 2))) for _ in range(n_cols)]
        for _ in range(n_rows)
    ]
    return Table.from_rows(rows, header_mode=mode, caption=caption)


def random_document(rng: random.Random, max_tables: int = 3, **kwargs) -> Document:
    """Valid document: one header mode, captions on every table when there are several."""
    mode = rng.choice(list(HeaderMode))
    n = rng.randint(1, max_tables)
    if n == 1 and rng.random() < 0.5:
        captions: Sequence[Optional[str]] = [None]
    else:
        captions = rng.sample(CAPTIONS, n)
    return Document(tables=tuple(random_table(rng, mode, c, **kwargs) for c in captions))


def fuzz_documents(n: int = 10_000, seed: int = 7) -> Iterator[Document]:
    """The fixed fuzz set shared by the codec and constraint checks."""
    rng = random.Random(seed)
    for _ in range(n):
        yield random_document(rng)


# ============================================
# FIXTURES
# ============================================

@pytest.fixture
def vocab() -> Vocab:
    """Specials followed by WORDS, so ids are known: Assists = 6, Points = 7, ..."""
    return Vocab(tokens=SPECIAL_TOKENS + WORDS)


@pytest.fixture
def player_slice() -> Table:
    """2x2 Both-mode slice: corner, Assists / Al Horford, 5."""
    return Table.from_rows([["", "Assists"], ["Al Horford", "5"]])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)


@pytest.fixture
def records():
    """Three one-table Both-mode records over WORDS."""
    return [
        DatasetRecord("Al Horford had 5 Assists", (Table.from_rows([["", "Assists"], ["Al Horford", "5"]]),)),
        DatasetRecord("Celtics had 10 Points", (Table.from_rows([["", "Points"], ["Celtics", "10"]]),)),
        DatasetRecord("Heat had 7 Points", (Table.from_rows([["", "Points"], ["Heat", "7"]]),)),
    ]
