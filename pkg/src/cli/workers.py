# TableGen Worker Pool
"""
Parallel generation over examples with a bounded thread pool.
Parameters are shared read-only; each task owns its decoding state.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import torch
from tqdm import tqdm

from ..decoding.generator import GenerationOptions, GenerationResult, generate
from ..model.transformer import TableGenTransformer
from ..text.vocab import Vocab

logger = logging.getLogger(__name__)


def generate_all(
    model: TableGenTransformer,
    vocab: Vocab,
    sources: Sequence[Sequence[int]],
    opts: GenerationOptions,
    jobs: int = 1,
    seed: int = 0,
    quiet: bool = True,
) -> List[GenerationResult]:
    """
    Generate for every source, in input order.

    Sampling uses a generator seeded with seed + index, so results do not
    depend on `jobs`.
    """
    model.eval()

    def task(index: int) -> GenerationResult:
        rng: Optional[torch.Generator] = None
        if opts.strategy == "sample":
            rng = torch.Generator().manual_seed(seed + index)
        return generate(model, vocab, sources[index], opts, rng=rng)

    progress = tqdm(total=len(sources), desc="generate", disable=quiet, leave=False)
    results: List[GenerationResult] = []
    try:
        if jobs <= 1:
            for index in range(len(sources)):
                results.append(task(index))
                progress.update(1)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for result in pool.map(task, range(len(sources))):
                    results.append(result)
                    progress.update(1)
    finally:
        progress.close()

    malformed = sum(1 for r in results if not r.well_formed)
    logger.debug(f"Generated {len(results)} sequences, {malformed} malformed")
    return results
