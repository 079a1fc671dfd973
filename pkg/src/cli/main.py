# TableGen Command Line
"""
Batch command-line surface.

Subcommands:
    synth     generate a synthetic corpus
    stats     dataset statistics per caption pool
    prepare   blank cells the text does not support
    encode    dataset -> token id file
    decode    token id file -> dataset
    train     fit a model
    generate  decode tables for every text of a dataset
    evaluate  score predictions against gold tables
    ablate    the 2x2 grid over table constraint and relation embeddings

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

import argparse
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, NoReturn, Optional, Sequence, Tuple

import torch

from ..data.dataset import (
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
    split_records,
    write_jsonl,
)
from ..data.synth import DOMAINS, generate_corpus
from ..decoding.generator import STRATEGIES
from ..errors import (
    DataError,
    DatasetParseError,
    EmptyCorpusError,
    MalformedSequenceError,
    RuntimeFailure,
    SequenceTooLongError,
    UsageError,
)
from ..evaluation.metrics import AVERAGES, CorpusScore, aggregate, percent
from ..model.batching import encode_record, encode_source
from ..model.checkpoint import load_checkpoint, save_checkpoint
from ..model.config import PRESETS
from ..model.training import EpochReport, fit
from ..model.transformer import TableGenTransformer
from ..tables.codec import decode_or_placeholder, encode_document
from ..tables.table import HeaderMode
from ..text.vocab import EOS_ID, Vocab, build_vocab, decode_text
from .manifest import RunManifest
from .settings import RunSettings, resolve_settings
from .workers import generate_all

logger = logging.getLogger("tablegen")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


# ============================================
# PARSER
# ============================================

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker threads for generation")
    p.add_argument("--manifest", help="write a JSON run manifest here")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--quiet", action="store_true", help="hide progress bars")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=list(PRESETS))
    p.add_argument("--d-model", type=int)
    p.add_argument("--n-heads", type=int)
    p.add_argument("--d-ff", type=int)
    p.add_argument("--n-enc-layers", type=int)
    p.add_argument("--n-dec-layers", type=int)
    p.add_argument("--model-max-len", type=int, help="longest source or target sequence")
    p.add_argument("--dropout", type=float)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--clip-norm", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--min-freq", type=int)
    p.add_argument("--valid-fraction", type=float, help="held out of --train when --valid is absent")
    p.add_argument("--valid-limit", type=int, help="validation texts decoded per epoch; 0 = all")


def _add_decoding(p: argparse.ArgumentParser, tre: bool = True, constraint: bool = True) -> None:
    if tre:
        p.add_argument("--tre", action=argparse.BooleanOptionalAction,
                       help="relation embeddings in decoder self-attention")
    if constraint:
        p.add_argument("--constraint", action=argparse.BooleanOptionalAction,
                       help="table-constrained decoding")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--beam", type=int, help="beam width; > 1 selects beam search")
    p.add_argument("--max-len", type=int, help="generated tokens after <bos>")
    p.add_argument("--temperature", type=float)
    p.add_argument("--length-norm", action=argparse.BooleanOptionalAction)
    p.add_argument("--strict", action=argparse.BooleanOptionalAction,
                   help="forbid caption lines")
    p.add_argument("--header-mode", choices=[m.value for m in HeaderMode])
    p.add_argument("--average", choices=AVERAGES)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="tablegen", description="Text-to-table generation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", dest="n_examples", type=int)
    p.add_argument("--domain", choices=DOMAINS)
    p.add_argument("--min-entities", type=int)
    p.add_argument("--max-entities", type=int)
    p.add_argument("--min-stat-types", type=int)
    p.add_argument("--max-stat-types", type=int)
    p.add_argument("--synonym-rate", type=float)
    p.add_argument("--distractor-rate", type=float)
    p.add_argument("--omission-rate", type=float)
    _add_common(p)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("dataset")
    _add_common(p)

    p = sub.add_parser("prepare", help="blank cells unsupported by the text")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("encode", help="serialize a dataset to token ids")
    p.add_argument("dataset")
    p.add_argument("--vocab", required=True, help="vocabulary file; built from the dataset if missing")
    p.add_argument("--out", required=True)
    p.add_argument("--min-freq", type=int)
    _add_common(p)

    p = sub.add_parser("decode", help="parse a token id file back into a dataset")
    p.add_argument("encoded")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--header-mode", choices=[m.value for m in HeaderMode])
    _add_common(p)

    p = sub.add_parser("train", help="fit a model")
    p.add_argument("--train", required=True)
    p.add_argument("--valid")
    p.add_argument("--vocab", required=True, help="vocabulary output")
    p.add_argument("--checkpoint", required=True, help="checkpoint output")
    _add_model(p)
    _add_decoding(p, constraint=False)
    _add_common(p)

    p = sub.add_parser("generate", help="generate tables for a dataset's texts")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--vocab", help="defaults to the path stored in the checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_decoding(p)
    _add_common(p)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--average", choices=AVERAGES)
    _add_common(p)

    p = sub.add_parser("ablate", help="train and score the TC x TRE grid")
    p.add_argument("--train", required=True)
    p.add_argument("--valid")
    p.add_argument("--test", help="defaults to the validation data")
    _add_model(p)
    _add_decoding(p, tre=False, constraint=False)
    _add_common(p)
    return parser


_NOT_SETTINGS = {"command", "config", "manifest", "log_level", "quiet", "out", "dataset",
                 "encoded", "vocab", "checkpoint", "train", "valid", "test", "data", "pred", "gold"}


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS}


# ============================================
# SHARED STEPS
# ============================================

def _corpus_strings(records: Sequence[DatasetRecord]) -> Iterator[str]:
    """Texts plus every caption and cell, so target words get their own ids."""
    for r in records:
        yield r.text
        for t in r.tables:
            if t.caption is not None:
                yield t.caption
            for row in t.rows:
                yield from row


def _header_mode(settings: RunSettings, records: Sequence[DatasetRecord]) -> HeaderMode:
    if settings.header_mode is not None:
        return HeaderMode(settings.header_mode)
    return first_header_mode(records) or HeaderMode.BOTH


def _require_records(records: List[DatasetRecord], path: str) -> List[DatasetRecord]:
    if not records:
        raise EmptyCorpusError(f"Dataset {path} holds no records.")
    return records


def _train_and_valid(settings: RunSettings, train_path: str, valid_path: Optional[str],
                     ) -> Tuple[List[DatasetRecord], List[DatasetRecord]]:
    train = _require_records(load_dataset(train_path), train_path)
    if valid_path is not None:
        return train, load_dataset(valid_path)
    return split_records(train, settings.valid_fraction)


def _predict(model: TableGenTransformer, vocab: Vocab, records: Sequence[DatasetRecord],
             settings: RunSettings, header_mode: HeaderMode, quiet: bool,
             constraint: Optional[bool] = None, tre: Optional[bool] = None,
             max_len: Optional[int] = None) -> List[Prediction]:
    opts = settings.generation_options(header_mode, constraint=constraint, tre=tre)
    if max_len is not None:
        opts = replace(opts, max_len=min(opts.max_len, max_len))
    sources = [encode_source(vocab, r.text) for r in records]
    results = generate_all(model, vocab, sources, opts, jobs=settings.jobs, seed=settings.seed, quiet=quiet)
    return [
        Prediction(tokens=tuple(vocab.token(i) for i in res.tokens), well_formed=res.well_formed,
                   tables=res.document.tables)
        for res in results
    ]


def _score(predictions: Sequence[Prediction], gold: Sequence[DatasetRecord], average: str) -> CorpusScore:
    if len(predictions) != len(gold):
        raise DataError(f"{len(predictions)} predictions for {len(gold)} gold records.")
    return aggregate([(p.document(), p.well_formed, g.document()) for p, g in zip(predictions, gold)],
                     average=average)


def _fit_model(settings: RunSettings, vocab: Vocab, train: Sequence[DatasetRecord],
               valid: Sequence[DatasetRecord], use_tre: bool, quiet: bool,
               ) -> Tuple[TableGenTransformer, List[EpochReport]]:
    train_ex = [encode_record(vocab, r) for r in train]
    valid_ex = [encode_record(vocab, r) for r in valid]
    longest = max(max(len(e.source), len(e.target)) for e in train_ex + valid_ex)
    if longest > settings.model_max_len:
        raise SequenceTooLongError(
            f"Longest sequence has {longest} tokens; raise --model-max-len above {settings.model_max_len}."
        )

    torch.manual_seed(settings.seed)
    model = TableGenTransformer(settings.model_config(len(vocab)))
    logger.info(f"Model with {model.parameter_count()} parameters, relation embeddings "
                f"{'on' if use_tre else 'off'}")

    header_mode = _header_mode(settings, train)
    subset = list(valid[: settings.valid_limit] if settings.valid_limit else valid)
    decode_cap = 2 * max((len(e.target) for e in valid_ex), default=1)
    cfg = settings.training_config(use_tre=use_tre)

    def validate_f1(m: TableGenTransformer) -> float:
        if not subset:
            return float("nan")
        preds = _predict(m, vocab, subset, settings, header_mode, quiet=True,
                         constraint=cfg.constrained_validation, tre=use_tre, max_len=decode_cap)
        return _score(preds, subset, settings.average).f1

    reports = fit(model, train_ex, valid_ex, cfg, validate_f1=validate_f1, quiet=quiet)
    return model, reports


def _print_score(score: CorpusScore) -> None:
    shown = score.as_dict()
    print(f"precision   {shown['precision']}")
    print(f"recall      {shown['recall']}")
    print(f"f1          {shown['f1']}")
    print(f"error_rate  {shown['error_rate']}")
    print(f"sequences   {score.n_sequences}")
    print(f"tables      {score.n_tables}")
    for name, pool in score.pools.items():
        print(f"  {name:<10} P {percent(pool.precision)}  R {percent(pool.recall)}  F1 {percent(pool.f1)}")


# ============================================
# SUBCOMMANDS
# ============================================

def cmd_synth(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    records = generate_corpus(settings.synth_config())
    save_dataset(records, args.out)
    manifest.datasets["out"] = args.out
    logger.info(f"Wrote {len(records)} {settings.domain} records to {args.out}")


def cmd_stats(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    stats = corpus_stats(load_dataset(args.dataset))
    manifest.datasets["dataset"] = args.dataset
    print(f"instances            {stats.n_instances}")
    print(f"mean text tokens     {stats.mean_text_tokens:.2f}")
    print(f"mean target tokens   {stats.mean_target_tokens:.2f}")
    print(f"{'pool':<12}{'tables':>8}{'# rows':>9}{'# columns':>11}{'non-empty':>11}{'ratio':>8}")
    for name, pool in stats.pools.items():
        print(f"{name:<12}{pool.n_tables:>8}{pool.mean_rows:>9.2f}{pool.mean_cols:>11.2f}"
              f"{pool.n_nonempty:>11}{percent(pool.nonempty_ratio):>8}")
    manifest.metrics = {
        "n_instances": stats.n_instances,
        "pools": {name: asdict(pool) for name, pool in stats.pools.items()},
    }


def cmd_prepare(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    records = [filter_unsupported_cells(r) for r in load_dataset(args.dataset)]
    save_dataset(records, args.out)
    manifest.datasets.update(dataset=args.dataset, out=args.out)
    logger.info(f"Filtered {len(records)} records into {args.out}")


def _load_or_build_vocab(path: str, records: Sequence[DatasetRecord], min_freq: int) -> Vocab:
    if Path(path).is_file():
        return Vocab.load(path)
    vocab = build_vocab(_corpus_strings(records), min_freq=min_freq)
    vocab.save(path)
    logger.info(f"Built vocabulary of {len(vocab)} tokens at {path}")
    return vocab


def cmd_encode(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    records = load_dataset(args.dataset)
    vocab = _load_or_build_vocab(args.vocab, records, settings.min_freq)
    write_jsonl(
        (
            {
                "source": list(encode_source(vocab, r.text)),
                "target": encode_document(vocab, r.document()),
                "header_mode": r.tables[0].header_mode.value,
            }
            for r in records
        ),
        args.out,
    )
    manifest.datasets.update(dataset=args.dataset, vocab=args.vocab, out=args.out)
    logger.info(f"Encoded {len(records)} records into {args.out}")


def _id_list(obj: Any, key: str, line: int) -> List[int]:
    ids = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(ids, list) or not all(isinstance(i, int) for i in ids):
        raise DatasetParseError(line, f"missing or non-integer '{key}' list")
    return ids


def cmd_decode(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    vocab = Vocab.load(args.vocab)
    records = []
    malformed = 0
    for line, obj in read_jsonl(args.encoded):
        source, target = _id_list(obj, "source", line), _id_list(obj, "target", line)
        if settings.header_mode is not None:
            mode = HeaderMode(settings.header_mode)
        else:
            try:
                mode = HeaderMode(obj.get("header_mode", HeaderMode.BOTH.value))
            except ValueError:
                raise DatasetParseError(line, f"unknown header_mode {obj.get('header_mode')!r}") from None
        try:
            decoded = decode_or_placeholder(vocab, target, mode)
        except MalformedSequenceError as e:
            raise DatasetParseError(line, str(e)) from e
        if not decoded.well_formed:
            malformed += 1
        text = decode_text(vocab, [] if source == [EOS_ID] else source)
        records.append(DatasetRecord(text=text, tables=decoded.document.tables))
    save_dataset(records, args.out)
    manifest.datasets.update(encoded=args.encoded, vocab=args.vocab, out=args.out)
    if malformed:
        logger.warning(f"{malformed} of {len(records)} sequences were malformed and repaired")
    logger.info(f"Decoded {len(records)} records into {args.out}")


def cmd_train(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    train, valid = _train_and_valid(settings, args.train, args.valid)
    vocab = build_vocab(_corpus_strings(train), min_freq=settings.min_freq)
    vocab.save(args.vocab)
    logger.info(f"{len(train)} training and {len(valid)} validation records, vocabulary {len(vocab)}")

    model, reports = _fit_model(settings, vocab, train, valid, settings.tre, args.quiet)
    save_checkpoint(model, args.checkpoint, vocab_path=args.vocab)

    manifest.datasets.update(train=args.train, valid=args.valid or f"{args.train} (tail)")
    manifest.checkpoint = args.checkpoint
    manifest.metrics = {"epochs": [asdict(r) for r in reports]}


def cmd_generate(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    model, stored_vocab = load_checkpoint(args.checkpoint)
    vocab_path = args.vocab or stored_vocab
    if vocab_path is None:
        raise UsageError(f"Checkpoint {args.checkpoint} names no vocabulary; pass --vocab.")
    vocab = Vocab.load(vocab_path)
    records = load_dataset(args.data)

    predictions = _predict(model, vocab, records, settings, _header_mode(settings, records), args.quiet)
    save_predictions(predictions, args.out)

    malformed = sum(1 for p in predictions if not p.well_formed)
    logger.info(f"Wrote {len(predictions)} predictions to {args.out} ({malformed} malformed)")
    manifest.datasets.update(data=args.data, vocab=str(vocab_path), out=args.out)
    manifest.checkpoint = args.checkpoint
    manifest.metrics = {"malformed": malformed}


def cmd_evaluate(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    score = _score(load_predictions(args.pred), load_dataset(args.gold), settings.average)
    _print_score(score)
    manifest.datasets.update(pred=args.pred, gold=args.gold)
    manifest.metrics = score.as_dict()


def cmd_ablate(args: argparse.Namespace, settings: RunSettings, manifest: RunManifest) -> None:
    train, valid = _train_and_valid(settings, args.train, args.valid)
    test = load_dataset(args.test) if args.test else valid
    if not test:
        raise EmptyCorpusError("Ablation needs validation or test records to score.")
    vocab = build_vocab(_corpus_strings(train), min_freq=settings.min_freq)
    mode = _header_mode(settings, train)

    grid: Dict[Tuple[bool, bool], CorpusScore] = {}
    for use_tre in (False, True):
        model, _ = _fit_model(settings, vocab, train, valid, use_tre, args.quiet)
        for constraint in (False, True):
            preds = _predict(model, vocab, test, settings, mode, args.quiet, constraint=constraint, tre=use_tre)
            grid[(constraint, use_tre)] = _score(preds, test, settings.average)

    print(f"{'TC':<5}{'TRE':<5}{'P':>8}{'R':>8}{'F1':>8}{'Err':>8}")
    for (constraint, use_tre), score in sorted(grid.items()):
        print(f"{'on' if constraint else 'off':<5}{'on' if use_tre else 'off':<5}"
              f"{percent(score.precision):>8}{percent(score.recall):>8}"
              f"{percent(score.f1):>8}{percent(score.error_rate):>8}")

    manifest.datasets.update(train=args.train, valid=args.valid or f"{args.train} (tail)",
                             test=args.test or "valid")
    manifest.metrics = {
        f"tc_{'on' if c else 'off'}_tre_{'on' if t else 'off'}": s.as_dict() for (c, t), s in grid.items()
    }


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunSettings, RunManifest], None]] = {
    "synth": cmd_synth,
    "stats": cmd_stats,
    "prepare": cmd_prepare,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "train": cmd_train,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


# ============================================
# ENTRY POINT
# ============================================

def _configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format="[%(name)s] %(message)s",
                        stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.log_level)
        settings = resolve_settings(_flag_values(args), args.config)
        manifest = RunManifest(command=args.command, settings=asdict(settings), seed=settings.seed)
        COMMANDS[args.command](args, settings, manifest)
        if args.manifest:
            manifest.finish()
            manifest.write(args.manifest)
        return EXIT_OK
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except UsageError as e:
        parser.print_help(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except RuntimeFailure as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run(sys.argv[1:]))
