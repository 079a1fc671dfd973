# TableGen Transformer
"""
Pre-LN transformer encoder-decoder with relation-augmented decoder
self-attention.

Each decoder layer owns four relation vectors of size d_k, shared by its
heads: a row-header key/value pair and a column-header key/value pair.
A position's key and value toward an earlier position j are shifted by the
row vectors when j lies in its row header and by the column vectors when j
lies in its column header. The vectors start at zero, so a fresh model
computes ordinary attention.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import torch
from torch import Tensor, nn
from torch.nn import functional as F

from ..errors import SequenceTooLongError, ShapeMismatchError
from ..tables.relation import RelationLabel
from ..text.vocab import PAD_ID
from .config import ModelConfig

logger = logging.getLogger(__name__)

KeyValue = Tuple[Tensor, Tensor]


# ============================================
# ATTENTION
# ============================================

class RelationEmbeddings(nn.Module):
    """Row/column header key and value vectors for one decoder layer."""

    def __init__(self, d_k: int):
        super().__init__()
        self.row_key = nn.Parameter(torch.zeros(d_k))
        self.row_value = nn.Parameter(torch.zeros(d_k))
        self.col_key = nn.Parameter(torch.zeros(d_k))
        self.col_value = nn.Parameter(torch.zeros(d_k))


def attention_with_relations(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    mask: Optional[Tensor] = None,
    rel: Optional[Tensor] = None,
    tau: Optional[RelationEmbeddings] = None,
    dropout: Optional[nn.Dropout] = None,
) -> Tuple[Tensor, Tensor]:
    """
    Scaled dot-product attention with optional header relations.

    Since a relation vector is shared by every pair carrying the same
    label, the relation terms reduce to a per-query dot product for the
    scores and a label-weighted probability mass for the values.

    Args:
        q: Queries (batch, heads, t_q, d_k)
        k: Keys (batch, heads, t_k, d_k)
        v: Values (batch, heads, t_k, d_k)
        mask: Boolean (batch, t_q or 1, t_k); True marks attendable keys
        rel: Relation labels (batch, t_q, t_k) as RelationLabel values
        tau: Relation vectors; required when rel is given
        dropout: Applied to the attention probabilities

    Returns:
        (per-head outputs (batch, heads, t_q, d_k), probabilities (batch, heads, t_q, t_k))

    Raises:
        ShapeMismatchError: Inconsistent tensor shapes.
    """
    if q.dim() != 4 or k.shape != v.shape or q.shape[:2] != k.shape[:2] or q.shape[-1] != k.shape[-1]:
        raise ShapeMismatchError(
            f"Attention shapes disagree: q={tuple(q.shape)}, k={tuple(k.shape)}, v={tuple(v.shape)}."
        )
    batch, _, t_q, d_k = q.shape
    t_k = k.shape[2]

    scores = q @ k.transpose(-2, -1)

    row = col = None
    if rel is not None:
        if tau is None:
            raise ValueError("Relation labels given without relation embeddings.")
        if tuple(rel.shape) != (batch, t_q, t_k):
            raise ShapeMismatchError(
                f"Relation labels have shape {tuple(rel.shape)}, expected {(batch, t_q, t_k)}."
            )
        row = (rel == RelationLabel.ROW_HEADER).unsqueeze(1).to(q.dtype)
        col = (rel == RelationLabel.COL_HEADER).unsqueeze(1).to(q.dtype)
        scores = scores + row * (q @ tau.row_key).unsqueeze(-1)
        scores = scores + col * (q @ tau.col_key).unsqueeze(-1)

    scores = scores / math.sqrt(d_k)
    if mask is not None:
        scores = scores.masked_fill(~mask.unsqueeze(1), float("-inf"))
    probs = torch.softmax(scores, dim=-1)
    weights = dropout(probs) if dropout is not None else probs

    out = weights @ v
    if row is not None and col is not None and tau is not None:
        out = out + (weights * row).sum(-1, keepdim=True) * tau.row_value
        out = out + (weights * col).sum(-1, keepdim=True) * tau.col_value
    return out, probs


class MultiHeadAttention(nn.Module):
    """Multi-head attention with bias-free projections."""

    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_k = d_model // n_heads
        self.w_q = nn.Linear(d_model, d_model, bias=False)
        self.w_k = nn.Linear(d_model, d_model, bias=False)
        self.w_v = nn.Linear(d_model, d_model, bias=False)
        self.w_o = nn.Linear(d_model, d_model, bias=False)
        self.dropout = nn.Dropout(dropout)

    def _split(self, x: Tensor) -> Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.n_heads, self.d_k).transpose(1, 2)

    def keys_values(self, x: Tensor) -> KeyValue:
        return self._split(self.w_k(x)), self._split(self.w_v(x))

    def forward(
        self,
        x: Tensor,
        k: Tensor,
        v: Tensor,
        mask: Optional[Tensor] = None,
        rel: Optional[Tensor] = None,
        tau: Optional[RelationEmbeddings] = None,
    ) -> Tensor:
        out, _ = attention_with_relations(
            self._split(self.w_q(x)), k, v, mask=mask, rel=rel, tau=tau, dropout=self.dropout
        )
        batch, _, length, _ = out.shape
        return self.w_o(out.transpose(1, 2).reshape(batch, length, self.n_heads * self.d_k))


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float):
        super().__init__()
        self.inner = nn.Linear(d_model, d_ff)
        self.outer = nn.Linear(d_ff, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: Tensor) -> Tensor:
        return self.outer(self.dropout(F.relu(self.inner(x))))


# ============================================
# LAYERS
# ============================================

class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.ln_attn = nn.LayerNorm(cfg.d_model)
        self.attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ln_ff = nn.LayerNorm(cfg.d_model)
        self.ff = FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x: Tensor, mask: Tensor) -> Tensor:
        h = self.ln_attn(x)
        x = x + self.dropout(self.attn(h, *self.attn.keys_values(h), mask=mask))
        return x + self.dropout(self.ff(self.ln_ff(x)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.ln_self = nn.LayerNorm(cfg.d_model)
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.relations = RelationEmbeddings(cfg.d_k)
        self.ln_cross = nn.LayerNorm(cfg.d_model)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ln_ff = nn.LayerNorm(cfg.d_model)
        self.ff = FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(
        self,
        x: Tensor,
        memory_kv: KeyValue,
        src_mask: Tensor,
        self_mask: Optional[Tensor],
        rel: Optional[Tensor] = None,
        past: Optional[KeyValue] = None,
    ) -> Tuple[Tensor, KeyValue]:
        """
        Returns:
            (layer output, self-attention keys/values including `past`)
        """
        h = self.ln_self(x)
        k, v = self.self_attn.keys_values(h)
        if past is not None:
            k = torch.cat([past[0], k], dim=2)
            v = torch.cat([past[1], v], dim=2)
        tau = self.relations if rel is not None else None
        x = x + self.dropout(self.self_attn(h, k, v, mask=self_mask, rel=rel, tau=tau))
        x = x + self.dropout(self.cross_attn(self.ln_cross(x), *memory_kv, mask=src_mask))
        x = x + self.dropout(self.ff(self.ln_ff(x)))
        return x, (k, v)


# ============================================
# INCREMENTAL DECODING STATE
# ============================================

@dataclass
class DecoderCache:
    """
    Per-layer keys/values for incremental decoding over a batch of
    hypotheses. Owned by one generation call.
    """

    memory_kv: List[KeyValue]
    src_mask: Tensor
    self_kv: List[Optional[KeyValue]] = field(default_factory=list)
    length: int = 0

    def reorder(self, index: Tensor) -> None:
        """Keep and reorder hypotheses along the batch dimension."""
        self.memory_kv = [(k.index_select(0, index), v.index_select(0, index)) for k, v in self.memory_kv]
        self.src_mask = self.src_mask.index_select(0, index)
        self.self_kv = [
            None if kv is None else (kv[0].index_select(0, index), kv[1].index_select(0, index))
            for kv in self.self_kv
        ]


# ============================================
# MODEL
# ============================================

class TableGenTransformer(nn.Module):
    """Encoder-decoder over a shared source/target vocabulary."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.config = cfg
        self.embed = nn.Embedding(cfg.vocab_size, cfg.d_model, padding_idx=PAD_ID)
        self.enc_pos = nn.Embedding(cfg.max_len, cfg.d_model)
        self.dec_pos = nn.Embedding(cfg.max_len, cfg.d_model)
        self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.n_enc_layers))
        self.decoder = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.n_dec_layers))
        self.enc_norm = nn.LayerNorm(cfg.d_model)
        self.dec_norm = nn.LayerNorm(cfg.d_model)
        self.output = nn.Linear(cfg.d_model, cfg.vocab_size)
        self.dropout = nn.Dropout(cfg.dropout)

    def _check_ids(self, ids: Tensor, what: str) -> None:
        if ids.dim() != 2:
            raise ShapeMismatchError(f"{what} ids must be (batch, length), got {tuple(ids.shape)}.")
        if ids.shape[1] > self.config.max_len:
            raise SequenceTooLongError(
                f"{what} length {ids.shape[1]} exceeds max_len {self.config.max_len}."
            )

    def encode(self, src: Tensor) -> Tuple[Tensor, Tensor]:
        """
        Returns:
            (encoder output (batch, src_len, d_model), key mask (batch, 1, src_len))
        """
        self._check_ids(src, "Source")
        src_mask = (src != PAD_ID).unsqueeze(1)
        positions = torch.arange(src.shape[1], device=src.device)
        x = self.dropout(self.embed(src) + self.enc_pos(positions))
        for layer in self.encoder:
            x = layer(x, src_mask)
        return self.enc_norm(x), src_mask

    def decode(
        self,
        tgt_in: Tensor,
        memory: Tensor,
        src_mask: Tensor,
        rel: Optional[Tensor] = None,
    ) -> Tensor:
        """Full-sequence decoder pass over gold prefixes; returns logits (batch, tgt_len, vocab)."""
        self._check_ids(tgt_in, "Target")
        if tgt_in.shape[0] != memory.shape[0]:
            raise ShapeMismatchError(
                f"Batch sizes differ: target {tgt_in.shape[0]}, source {memory.shape[0]}."
            )
        length = tgt_in.shape[1]
        causal = torch.ones(length, length, dtype=torch.bool, device=tgt_in.device).tril()
        # position 0 holds <bos>, so every row keeps at least one key
        self_mask = causal.unsqueeze(0) & (tgt_in != PAD_ID).unsqueeze(1)

        positions = torch.arange(length, device=tgt_in.device)
        x = self.dropout(self.embed(tgt_in) + self.dec_pos(positions))
        for layer in self.decoder:
            x, _ = layer(x, layer.cross_attn.keys_values(memory), src_mask, self_mask, rel=rel)
        return self.output(self.dec_norm(x))

    def forward(self, src: Tensor, tgt_in: Tensor, rel: Optional[Tensor] = None) -> Tensor:
        """
        Logits for every target position.

        Args:
            src: Source ids (batch, src_len), right-padded with <pad>
            tgt_in: Decoder input ids (batch, tgt_len), starting with <bos>
            rel: Relation labels (batch, tgt_len, tgt_len); None selects
                conventional self-attention

        Raises:
            ShapeMismatchError: Inconsistent shapes.
            SequenceTooLongError: A sequence exceeds max_len.
        """
        memory, src_mask = self.encode(src)
        return self.decode(tgt_in, memory, src_mask, rel=rel)

    # ============================================
    # INCREMENTAL DECODING
    # ============================================

    def start_decoding(self, memory: Tensor, src_mask: Tensor) -> DecoderCache:
        return DecoderCache(
            memory_kv=[layer.cross_attn.keys_values(memory) for layer in self.decoder],
            src_mask=src_mask,
            self_kv=[None] * len(self.decoder),
        )

    def decode_step(self, tokens: Tensor, cache: DecoderCache,
                    rel_row: Optional[Tensor] = None) -> Tensor:
        """
        Feed one token per hypothesis at position cache.length.

        Args:
            tokens: Ids (batch,)
            cache: Updated in place
            rel_row: Labels of the new position toward positions
                0..cache.length, shape (batch, cache.length + 1); None
                selects conventional self-attention

        Returns:
            Logits (batch, vocab) for the next token.
        """
        position = cache.length
        if position >= self.config.max_len:
            raise SequenceTooLongError(f"Decoding position {position} exceeds max_len {self.config.max_len}.")
        pos = torch.full((1,), position, dtype=torch.long, device=tokens.device)
        x = self.dropout(self.embed(tokens.unsqueeze(1)) + self.dec_pos(pos))
        rel = rel_row.unsqueeze(1) if rel_row is not None else None
        for index, layer in enumerate(self.decoder):
            x, kv = layer(x, cache.memory_kv[index], cache.src_mask, None,
                          rel=rel, past=cache.self_kv[index])
            cache.self_kv[index] = kv
        cache.length += 1
        return self.output(self.dec_norm(x)).squeeze(1)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
