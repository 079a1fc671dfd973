# TableGen Metrics
"""
Exact-match cell precision/recall/F1 and the malformed-output error rate.

A cell counts only when it is non-empty, is not a header, and matches on
content, row key and column key alike. Scores are computed per table and
macro-averaged.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Final, List, Optional, Sequence, Tuple

from ..tables.codec import decode_or_placeholder
from ..tables.table import Document, HeaderMode, Table, header_of, non_header_cells
from ..text.vocab import Vocab

AVERAGES: Final[Tuple[str, ...]] = ("table", "instance")
DEFAULT_POOL: Final[str] = "table"


@dataclass(frozen=True)
class KeyedCell:
    row_key: str
    col_key: str
    content: str


def keyed_cells(t: Table) -> "Counter[KeyedCell]":
    """Multiset of the non-empty, non-header cells of a table."""
    cells: "Counter[KeyedCell]" = Counter()
    for i, j in non_header_cells(t):
        content = t.rows[i - 1][j - 1]
        if j > t.n_cols or not content:
            continue
        row_key, col_key = header_of(t, i, j)
        cells[KeyedCell(row_key, col_key, content)] += 1
    return cells


@dataclass(frozen=True)
class TableScore:
    """Fractions in [0, 1]."""

    precision: float
    recall: float
    f1: float

    @staticmethod
    def from_counts(matched: int, n_pred: int, n_gold: int) -> "TableScore":
        if n_pred == 0 and n_gold == 0:
            return TableScore(1.0, 1.0, 1.0)
        precision = matched / n_pred if n_pred else 0.0
        recall = matched / n_gold if n_gold else 1.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return TableScore(precision, recall, f1)


ZERO_SCORE: Final[TableScore] = TableScore(0.0, 0.0, 0.0)
# No gold cells to miss, nothing predicted is correct
EXTRA_TABLE_SCORE: Final[TableScore] = TableScore(0.0, 1.0, 0.0)


def score_tables(pred: Table, gold: Table) -> TableScore:
    """Multiset intersection of keyed cells against each side's size."""
    p, g = keyed_cells(pred), keyed_cells(gold)
    matched = sum((p & g).values())
    return TableScore.from_counts(matched, sum(p.values()), sum(g.values()))


def _mean(scores: Sequence[TableScore]) -> TableScore:
    if not scores:
        return ZERO_SCORE
    n = len(scores)
    return TableScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


# ============================================
# TABLE PAIRING
# ============================================

def _pool(t: Table) -> str:
    return t.caption if t.caption is not None else DEFAULT_POOL


def pair_tables(pred: Document, gold: Document) -> List[Tuple[Optional[Table], Optional[Table]]]:
    """
    Pair predicted with gold tables: by caption when the gold tables carry
    captions, by position otherwise. Unpaired tables pair with None.
    """
    if all(t.caption is not None for t in gold.tables):
        remaining = list(pred.tables)
        pairs: List[Tuple[Optional[Table], Optional[Table]]] = []
        for g in gold.tables:
            match = next((p for p in remaining if p.caption == g.caption), None)
            if match is not None:
                remaining.remove(match)
            pairs.append((match, g))
        pairs.extend((p, None) for p in remaining)
        return pairs

    n = max(len(pred.tables), len(gold.tables))
    return [
        (pred.tables[k] if k < len(pred.tables) else None,
         gold.tables[k] if k < len(gold.tables) else None)
        for k in range(n)
    ]


def score_documents(pred: Document, gold: Document) -> List[Tuple[str, TableScore]]:
    """
    Per-table entries for one instance, each tagged with its pool name.

    A gold table without a prediction scores zero. Every extra predicted
    table is its own entry with zero precision, even one without keyed
    cells, which counting alone would score as a perfect match.
    """
    entries = []
    for p, g in pair_tables(pred, gold):
        if p is None:
            if g is not None:
                entries.append((_pool(g), ZERO_SCORE))
        elif g is None:
            entries.append((_pool(p), EXTRA_TABLE_SCORE))
        else:
            entries.append((_pool(g), score_tables(p, g)))
    return entries


# ============================================
# CORPUS SCORING
# ============================================

@dataclass(frozen=True)
class CorpusScore:
    precision: float
    recall: float
    f1: float
    error_rate: float
    n_sequences: int
    n_tables: int
    pools: Dict[str, TableScore] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        """Percentages rounded to two decimals, as reported."""
        return {
            "precision": percent(self.precision),
            "recall": percent(self.recall),
            "f1": percent(self.f1),
            "error_rate": percent(self.error_rate),
            "n_sequences": self.n_sequences,
            "n_tables": self.n_tables,
            "pools": {
                name: {"precision": percent(s.precision), "recall": percent(s.recall), "f1": percent(s.f1)}
                for name, s in self.pools.items()
            },
        }


def percent(x: float) -> str:
    """Fraction as a percentage with two decimals: 0.074 -> "7.40"."""
    return f"{100 * x:.2f}"


def aggregate(
    instances: Sequence[Tuple[Document, bool, Document]],
    average: str = "table",
) -> CorpusScore:
    """
    Macro-average decoded predictions against gold documents.

    Args:
        instances: (predicted document, well_formed, gold document) triples
        average: "table" averages over every table in the corpus;
            "instance" averages within each instance first
    """
    if average not in AVERAGES:
        raise ValueError(f"average must be one of {AVERAGES}, got '{average}'.")

    all_entries: List[TableScore] = []
    per_instance: List[TableScore] = []
    pools: Dict[str, List[TableScore]] = defaultdict(list)
    malformed = 0
    for pred, well_formed, gold in instances:
        if not well_formed:
            malformed += 1
        entries = score_documents(pred, gold)
        for name, score in entries:
            pools[name].append(score)
            all_entries.append(score)
        if entries:
            per_instance.append(_mean([s for _, s in entries]))

    overall = _mean(all_entries if average == "table" else per_instance)
    n = len(instances)
    return CorpusScore(
        precision=overall.precision,
        recall=overall.recall,
        f1=overall.f1,
        error_rate=malformed / n if n else 0.0,
        n_sequences=n,
        n_tables=len(all_entries),
        pools={name: _mean(scores) for name, scores in sorted(pools.items())},
    )


def score_corpus(
    vocab: Vocab,
    pairs: Sequence[Tuple[Sequence[int], Document]],
    header_mode: Optional[HeaderMode] = None,
    average: str = "table",
) -> CorpusScore:
    """
    Decode and repair every raw sequence, then score it against its gold.

    Args:
        pairs: (raw token ids starting with <bos>, gold document)
        header_mode: Mode given to decoded tables; defaults to the mode of
            each gold document's first table
    """
    instances = []
    for ts, gold in pairs:
        mode = header_mode or (gold.tables[0].header_mode if gold.tables else HeaderMode.BOTH)
        decoded = decode_or_placeholder(vocab, ts, mode)
        instances.append((decoded.document, decoded.well_formed, gold))
    return aggregate(instances, average=average)
