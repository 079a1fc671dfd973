# TableGen Batching
"""
Padded tensor batches for training on gold target prefixes.
"""

import random
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import torch
from torch import Tensor

from ..data.dataset import DatasetRecord
from ..tables.codec import encode_document
from ..tables.relation import RelationMatrix, relations_full
from ..tables.table import HeaderMode
from ..text.vocab import EOS_ID, PAD_ID, Vocab, encode_text


@dataclass(frozen=True)
class EncodedExample:
    """Source ids and the full <bos> ... <eos> target of one record."""

    source: Tuple[int, ...]
    target: Tuple[int, ...]
    header_mode: HeaderMode


def encode_source(vocab: Vocab, text: str) -> Tuple[int, ...]:
    """Source ids of a text; an empty text becomes a lone <eos> so the encoder has a key."""
    return tuple(encode_text(vocab, text)) or (EOS_ID,)


def encode_record(vocab: Vocab, record: DatasetRecord) -> EncodedExample:
    document = record.document()
    return EncodedExample(
        source=encode_source(vocab, record.text),
        target=tuple(encode_document(vocab, document)),
        header_mode=document.tables[0].header_mode,
    )


@dataclass(frozen=True)
class Batch:
    """
    target_in is target_out shifted right by one, beginning with <bos>.
    relations is None for batches built without relation labels.
    """

    source: Tensor
    target_in: Tensor
    target_out: Tensor
    relations: Optional[Tensor] = None

    @property
    def size(self) -> int:
        return self.source.shape[0]

    def to(self, device: torch.device) -> "Batch":
        return Batch(
            source=self.source.to(device),
            target_in=self.target_in.to(device),
            target_out=self.target_out.to(device),
            relations=None if self.relations is None else self.relations.to(device),
        )


def relation_tensor(matrix: RelationMatrix, length: int) -> Tensor:
    """Dense (length, length) label tensor; pairs beyond `length` are dropped."""
    dense = torch.zeros(length, length, dtype=torch.long)
    for (i, j), label in matrix.labels.items():
        if i < length and j < length:
            dense[i, j] = int(label)
    return dense


def _pad(rows: Sequence[Sequence[int]]) -> Tensor:
    width = max(len(r) for r in rows)
    out = torch.full((len(rows), width), PAD_ID, dtype=torch.long)
    for k, row in enumerate(rows):
        out[k, : len(row)] = torch.tensor(row, dtype=torch.long)
    return out


def make_batch(examples: Sequence[EncodedExample], with_relations: bool = True) -> Batch:
    """
    Pad examples into one batch.

    Relation labels come from parsing each complete gold target, then are
    cut to the decoder input positions.
    """
    if not examples:
        raise ValueError("Cannot build a batch from no examples.")
    target_in = _pad([ex.target[:-1] for ex in examples])
    target_out = _pad([ex.target[1:] for ex in examples])

    relations = None
    if with_relations:
        length = target_in.shape[1]
        relations = torch.stack([
            relation_tensor(relations_full(ex.target, ex.header_mode), length)
            for ex in examples
        ])

    return Batch(
        source=_pad([ex.source for ex in examples]),
        target_in=target_in,
        target_out=target_out,
        relations=relations,
    )


def iter_batches(
    examples: Sequence[EncodedExample],
    batch_size: int,
    rng: Optional[random.Random] = None,
    with_relations: bool = True,
) -> Iterator[Batch]:
    """Yield batches in order, or shuffled when an rng is given."""
    order: List[int] = list(range(len(examples)))
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        chunk = [examples[k] for k in order[start:start + batch_size]]
        yield make_batch(chunk, with_relations=with_relations)
