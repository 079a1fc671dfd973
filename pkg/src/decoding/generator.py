# TableGen Generator
"""
Autoregressive generation: greedy, beam and temperature sampling.

Every hypothesis carries its own constraint state and relation state.
<pad> and <bos> are never candidates. With the constraint on,
log-probabilities are further masked to the allowed set; scores are
always renormalized over the remaining candidates.
"""

import logging
from dataclasses import dataclass, field
from typing import Final, List, Optional, Sequence, Tuple

import torch
from torch import Tensor

from ..errors import NoValidTokenError
from ..model.transformer import TableGenTransformer
from ..tables.codec import decode_or_placeholder
from ..tables.relation import LabeledPosition, RelationState, initial_relation_state
from ..tables.table import Document, HeaderMode
from ..text.vocab import BOS_ID, EOS_ID, PAD_ID, Vocab
from .constraint import ConstraintState, TableConstraint

logger = logging.getLogger(__name__)

DEFAULT_MAX_DECODE_LEN: Final[int] = 512
STRATEGIES: Final[Tuple[str, ...]] = ("greedy", "beam", "sample")

# Ids no strategy may emit; decoder inputs never contain them after <bos>
NEVER_GENERATED: Final[Tuple[int, ...]] = (PAD_ID, BOS_ID)


@dataclass(frozen=True)
class GenerationOptions:
    """Decoding switches; `tre` needs a model trained with relations to help."""

    constraint: bool = True
    tre: bool = True
    strategy: str = "greedy"
    beam_width: int = 1

    # Generated tokens after <bos>, <eos> included
    max_len: int = DEFAULT_MAX_DECODE_LEN

    # Sampling only
    temperature: float = 1.0

    # Beam ranking by mean instead of total log-probability
    length_normalize: bool = False

    # No caption lines
    strict: bool = False

    header_mode: HeaderMode = HeaderMode.BOTH

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got '{self.strategy}'.")
        if self.beam_width < 1:
            raise ValueError(f"beam_width must be >= 1, got {self.beam_width}.")
        if self.strategy == "sample" and self.beam_width != 1:
            raise ValueError("Sampling draws a single hypothesis; beam_width must be 1.")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}.")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}.")


@dataclass(frozen=True)
class GenerationResult:
    """Raw tokens (<bos> first), their pre-repair verdict and the repaired document."""

    tokens: Tuple[int, ...]
    well_formed: bool
    document: Document
    score: float = 0.0


@dataclass
class Hypothesis:
    tokens: List[int]
    score: float
    constraint: Optional[ConstraintState]
    relations: Optional[RelationState]

    # Labels of the last token toward earlier positions, fed with it next step
    pending: List[LabeledPosition] = field(default_factory=list)

    @property
    def finished(self) -> bool:
        return self.tokens[-1] == EOS_ID

    def rank(self, length_normalize: bool) -> float:
        if not length_normalize:
            return self.score
        return self.score / max(1, len(self.tokens) - 1)


def _rel_rows(hyps: Sequence[Hypothesis], position: int) -> Tensor:
    rows = torch.zeros(len(hyps), position + 1, dtype=torch.long)
    for k, hyp in enumerate(hyps):
        for j, label in hyp.pending:
            rows[k, j] = int(label)
    return rows


def _extend(hyp: Hypothesis, token: int, logp: float, constraint: Optional[TableConstraint]) -> Hypothesis:
    relations = hyp.relations
    pending: List[LabeledPosition] = []
    if relations is not None:
        relations = relations.clone()
        pending = relations.advance(token, len(hyp.tokens))
    return Hypothesis(
        tokens=hyp.tokens + [token],
        score=hyp.score + logp,
        constraint=(constraint.advance(hyp.constraint, token)
                    if constraint is not None and hyp.constraint is not None else hyp.constraint),
        relations=relations,
        pending=pending,
    )


def _step_log_probs(logits: Tensor, hyps: Sequence[Hypothesis], constraint: Optional[TableConstraint],
                    temperature: float) -> Tensor:
    scaled = logits.double() / temperature
    scaled[:, list(NEVER_GENERATED)] = float("-inf")
    if constraint is not None:
        mask = torch.stack([constraint.mask(h.constraint) for h in hyps]).to(scaled.device)  # type: ignore[arg-type]
        if not bool(mask.any(dim=-1).all()):
            raise NoValidTokenError("Table constraint left no candidate token.")
        scaled = scaled.masked_fill(~mask, float("-inf"))
    return torch.log_softmax(scaled, dim=-1)


@torch.no_grad()
def generate(
    model: TableGenTransformer,
    vocab: Vocab,
    source: Sequence[int],
    opts: GenerationOptions = GenerationOptions(),
    rng: Optional[torch.Generator] = None,
) -> GenerationResult:
    """
    Decode one source sequence.

    Args:
        model: Trained model; switched to eval mode
        vocab: Vocabulary for parsing the output
        source: Source token ids
        opts: Strategy, constraint and relation switches
        rng: Random generator for the "sample" strategy

    Returns:
        GenerationResult; well_formed is judged before repair.

    Raises:
        SequenceTooLongError: The source exceeds the model's max_len.
        NoValidTokenError: The constraint mask became empty.
    """
    opts.validate()
    model.eval()
    width = opts.beam_width if opts.strategy == "beam" else 1
    limit = min(opts.max_len, model.config.max_len)
    constraint = TableConstraint(len(vocab), opts.strict) if opts.constraint else None

    device = next(model.parameters()).device
    memory, src_mask = model.encode(torch.tensor([list(source)], dtype=torch.long, device=device))
    cache = model.start_decoding(memory, src_mask)

    active = [Hypothesis(
        tokens=[BOS_ID],
        score=0.0,
        constraint=constraint.initial() if constraint is not None else None,
        relations=initial_relation_state(opts.header_mode) if opts.tre else None,
    )]
    finished: List[Hypothesis] = []

    for position in range(limit):
        fed = torch.tensor([h.tokens[-1] for h in active], dtype=torch.long, device=device)
        rel_row = _rel_rows(active, position).to(device) if opts.tre else None
        logits = model.decode_step(fed, cache, rel_row)
        temperature = opts.temperature if opts.strategy == "sample" else 1.0
        log_probs = _step_log_probs(logits, active, constraint, temperature)

        if opts.strategy == "sample":
            choice = torch.multinomial(log_probs[0].exp(), 1, generator=rng)
            parents, tokens = [0], [int(choice)]
        else:
            slots = width - len(finished)
            scores = torch.tensor([h.score for h in active], dtype=torch.double, device=device)
            flat = (scores.unsqueeze(1) + log_probs).reshape(-1)
            top = torch.topk(flat, min(slots, flat.numel()))
            picks = [int(i) for v, i in zip(top.values, top.indices) if torch.isfinite(v)]
            vocab_size = log_probs.shape[1]
            parents = [i // vocab_size for i in picks]
            tokens = [i % vocab_size for i in picks]

        survivors: List[Hypothesis] = []
        keep: List[int] = []
        for parent, token in zip(parents, tokens):
            hyp = _extend(active[parent], token, float(log_probs[parent, token]), constraint)
            if hyp.finished:
                finished.append(hyp)
            else:
                survivors.append(hyp)
                keep.append(parent)

        if not survivors or len(finished) >= width:
            active = survivors
            break
        active = survivors
        cache.reorder(torch.tensor(keep, dtype=torch.long, device=device))

    pool = finished + active
    best = max(pool, key=lambda h: h.rank(opts.length_normalize))
    result = decode_or_placeholder(vocab, best.tokens, opts.header_mode)
    if not best.finished:
        logger.debug(f"Generation hit the length limit of {limit} tokens")
    return GenerationResult(tokens=tuple(best.tokens), well_formed=result.well_formed,
                            document=result.document, score=best.score)
