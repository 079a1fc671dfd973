# TableGen Training
"""
Cross-entropy training with Adam and global-norm gradient clipping.
Batches are prepared on a background thread and handed over through a
bounded queue; parameter updates stay on the calling thread.
"""

import logging
import math
import queue
import random
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence

import torch
from torch import Tensor
from torch.nn import functional as F
from tqdm import tqdm

from ..errors import NonFiniteLossError
from ..text.vocab import PAD_ID
from .batching import Batch, EncodedExample, iter_batches
from .config import ADAM_BETAS, ADAM_EPS, TrainingConfig
from .transformer import TableGenTransformer

logger = logging.getLogger(__name__)


# ============================================
# LOSS AND SINGLE STEP
# ============================================

def sequence_loss(logits: Tensor, target_out: Tensor) -> Tensor:
    """Mean negative log-likelihood over non-<pad> target positions."""
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), target_out.reshape(-1), ignore_index=PAD_ID
    )


def batch_logits(model: TableGenTransformer, batch: Batch, use_tre: bool) -> Tensor:
    rel = batch.relations if use_tre else None
    if use_tre and rel is None:
        raise ValueError("Relation-aware forward needs a batch built with relations.")
    return model(batch.source, batch.target_in, rel=rel)


def make_optimizer(model: TableGenTransformer, learning_rate: float) -> torch.optim.Adam:
    return torch.optim.Adam(model.parameters(), lr=learning_rate, betas=ADAM_BETAS, eps=ADAM_EPS)


def train_step(
    model: TableGenTransformer,
    optimizer: torch.optim.Optimizer,
    batch: Batch,
    clip_norm: float,
    use_tre: bool = True,
    learning_rate: Optional[float] = None,
) -> float:
    """
    One clipped Adam update on a batch.

    Returns:
        The loss before the update.

    Raises:
        NonFiniteLossError: Loss is NaN or infinite; parameters are left untouched.
    """
    if learning_rate is not None:
        for group in optimizer.param_groups:
            group["lr"] = learning_rate

    model.train()
    optimizer.zero_grad(set_to_none=True)
    loss = sequence_loss(batch_logits(model, batch, use_tre), batch.target_out)
    value = loss.item()
    if not math.isfinite(value):
        raise NonFiniteLossError(f"Training loss is {value}.")
    loss.backward()
    torch.nn.utils.clip_grad_norm_(model.parameters(), clip_norm)
    optimizer.step()
    return value


@torch.no_grad()
def evaluate_loss(model: TableGenTransformer, examples: Sequence[EncodedExample],
                  batch_size: int, use_tre: bool) -> float:
    """Token-weighted mean loss over examples, without dropout."""
    if not examples:
        return float("nan")
    model.eval()
    total, tokens = 0.0, 0
    for batch in iter_batches(examples, batch_size, with_relations=use_tre):
        n = int((batch.target_out != PAD_ID).sum())
        total += sequence_loss(batch_logits(model, batch, use_tre), batch.target_out).item() * n
        tokens += n
    return total / tokens


# ============================================
# BACKGROUND BATCH PREPARATION
# ============================================

_DONE = object()


class BatchPrefetcher:
    """
    Builds batches on a worker thread; the consumer iterates them in order.
    An exception on the worker is re-raised in the consumer.
    """

    def __init__(self, source: Iterator[Batch], depth: int = 4):
        self._queue: "queue.Queue[object]" = queue.Queue(maxsize=depth)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, args=(source,), daemon=True)
        self._thread.start()

    def _put(self, item: object) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _run(self, source: Iterator[Batch]) -> None:
        try:
            for batch in source:
                if not self._put(batch):
                    return
        except BaseException as e:
            self._put(e)
            return
        self._put(_DONE)

    def __iter__(self) -> Iterator[Batch]:
        try:
            while True:
                item = self._queue.get()
                if item is _DONE:
                    return
                if isinstance(item, BaseException):
                    raise item
                yield item  # type: ignore[misc]
        finally:
            self.close()

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=1.0)


# ============================================
# TRAINING LOOP
# ============================================

@dataclass(frozen=True)
class EpochReport:
    epoch: int
    train_loss: float
    valid_loss: float
    valid_f1: float


def fit(
    model: TableGenTransformer,
    train: Sequence[EncodedExample],
    valid: Sequence[EncodedExample],
    cfg: TrainingConfig,
    validate_f1: Optional[Callable[[TableGenTransformer], float]] = None,
    quiet: bool = False,
) -> List[EpochReport]:
    """
    Train for cfg.epochs epochs, logging one line per epoch.

    Args:
        validate_f1: Returns the validation cell F1 (a fraction) for the
            current parameters; NaN is logged when absent.
        quiet: Hide the progress bar.
    """
    cfg.validate()
    torch.manual_seed(cfg.seed)
    rng = random.Random(cfg.seed)
    optimizer = make_optimizer(model, cfg.learning_rate)
    n_batches = math.ceil(len(train) / cfg.batch_size)

    reports = []
    for epoch in range(1, cfg.epochs + 1):
        batches = BatchPrefetcher(iter_batches(train, cfg.batch_size, rng=rng, with_relations=cfg.use_tre))
        total, steps = 0.0, 0
        for batch in tqdm(batches, total=n_batches, desc=f"epoch {epoch}", disable=quiet, leave=False):
            total += train_step(model, optimizer, batch, cfg.clip_norm, use_tre=cfg.use_tre)
            steps += 1

        report = EpochReport(
            epoch=epoch,
            train_loss=total / steps if steps else float("nan"),
            valid_loss=evaluate_loss(model, valid, cfg.batch_size, cfg.use_tre),
            valid_f1=validate_f1(model) if validate_f1 is not None else float("nan"),
        )
        logger.info(
            f"epoch {report.epoch} train_loss {report.train_loss:.4f} "
            f"valid_loss {report.valid_loss:.4f} valid_f1 {100 * report.valid_f1:.2f}"
        )
        reports.append(report)
    model.eval()
    return reports
