# TableGen Datasets
"""
JSONL text-table datasets and prediction files.

Dataset line schema:
    {"text": str, "tables": [{"caption": str | null,
                               "header_mode": "both" | "col" | "row",
                               "rows": [[str, ...], ...]}, ...]}

Prediction line schema:
    {"tokens": [str, ...], "well_formed": bool, "tables": [...]}
"""

import json
import logging
import os
import tempfile
from collections import defaultdict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..errors import DatasetIOError, DatasetParseError
from ..tables.table import Document, HeaderMode, Table, validate_document

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class DatasetRecord:
    """One text with its gold tables."""

    text: str
    tables: Tuple[Table, ...]

    def document(self) -> Document:
        return Document(tables=self.tables)


@dataclass(frozen=True)
class Prediction:
    """Raw generated tokens, the pre-repair verdict and the repaired tables."""

    tokens: Tuple[str, ...]
    well_formed: bool
    tables: Tuple[Table, ...]

    def document(self) -> Document:
        return Document(tables=self.tables)


# ============================================
# JSON MAPPING
# ============================================

def table_to_json(t: Table) -> Dict[str, Any]:
    return {"caption": t.caption, "header_mode": t.header_mode.value, "rows": t.to_lists()}


def table_from_json(obj: Any) -> Table:
    """
    Raises:
        ValueError: The object does not follow the table schema.
    """
    if not isinstance(obj, dict):
        raise ValueError("table entry is not an object")
    caption = obj.get("caption")
    if caption is not None and not isinstance(caption, str):
        raise ValueError("'caption' must be a string or null")
    try:
        mode = HeaderMode(obj.get("header_mode", HeaderMode.BOTH.value))
    except ValueError:
        raise ValueError(f"unknown header_mode {obj.get('header_mode')!r}") from None
    rows = obj.get("rows")
    if not isinstance(rows, list) or not all(
        isinstance(r, list) and all(isinstance(c, str) for c in r) for r in rows
    ):
        raise ValueError("'rows' must be a list of lists of strings")
    return Table.from_rows(rows, header_mode=mode, caption=caption)


def _tables_from_json(obj: Mapping[str, Any]) -> Tuple[Table, ...]:
    tables = obj.get("tables")
    if not isinstance(tables, list):
        raise ValueError("missing or non-list 'tables' field")
    return tuple(table_from_json(t) for t in tables)


def record_to_json(record: DatasetRecord) -> Dict[str, Any]:
    return {"text": record.text, "tables": [table_to_json(t) for t in record.tables]}


def record_from_json(obj: Any) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    text = obj.get("text")
    if not isinstance(text, str):
        raise ValueError("missing or non-string 'text' field")
    record = DatasetRecord(text=text, tables=_tables_from_json(obj))
    violations = validate_document(record.document())
    if violations:
        raise ValueError("invalid tables: " + "; ".join(str(v) for v in violations[:5]))
    return record


def prediction_to_json(p: Prediction) -> Dict[str, Any]:
    return {
        "tokens": list(p.tokens),
        "well_formed": p.well_formed,
        "tables": [table_to_json(t) for t in p.tables],
    }


def prediction_from_json(obj: Any) -> Prediction:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    tokens = obj.get("tokens")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ValueError("missing or non-list 'tokens' field")
    if not isinstance(obj.get("well_formed"), bool):
        raise ValueError("missing or non-boolean 'well_formed' field")
    return Prediction(tokens=tuple(tokens), well_formed=obj["well_formed"],
                      tables=_tables_from_json(obj))


# ============================================
# FILE I/O
# ============================================

def write_jsonl(rows: Iterable[Mapping[str, Any]], path: PathLike) -> None:
    """Write one JSON object per line, replacing the file atomically."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}-")
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except OSError as e:
        raise DatasetIOError(f"Cannot write {path}: {e}") from e


def read_jsonl(path: PathLike) -> List[Tuple[int, Any]]:
    """
    Parse every non-blank line.

    Returns:
        (1-based line number, decoded object) pairs.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").split("\n")
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetIOError(f"Cannot read {path}: {e}") from e

    out = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            out.append((number, json.loads(line)))
        except json.JSONDecodeError as e:
            raise DatasetParseError(number, f"invalid JSON ({e.msg})") from e
    return out


def save_dataset(records: Iterable[DatasetRecord], path: PathLike) -> None:
    write_jsonl((record_to_json(r) for r in records), path)


def load_dataset(path: PathLike) -> List[DatasetRecord]:
    """
    Raises:
        DatasetIOError: File missing or unreadable.
        DatasetParseError: A line breaks the schema; carries its line number.
    """
    records = []
    for number, obj in read_jsonl(path):
        try:
            records.append(record_from_json(obj))
        except ValueError as e:
            raise DatasetParseError(number, str(e)) from e
    logger.debug(f"Loaded {len(records)} records from {path}")
    return records


def save_predictions(predictions: Iterable[Prediction], path: PathLike) -> None:
    write_jsonl((prediction_to_json(p) for p in predictions), path)


def load_predictions(path: PathLike) -> List[Prediction]:
    predictions = []
    for number, obj in read_jsonl(path):
        try:
            predictions.append(prediction_from_json(obj))
        except ValueError as e:
            raise DatasetParseError(number, str(e)) from e
    return predictions


# ============================================
# UNSUPPORTED CONTENT FILTER
# ============================================

def _contains_span(words: Sequence[str], span: Sequence[str]) -> bool:
    n = len(span)
    return any(list(words[k:k + n]) == list(span) for k in range(len(words) - n + 1))


def filter_unsupported_cells(record: DatasetRecord) -> DatasetRecord:
    """
    Blank every non-empty, non-header cell whose words do not occur as a
    contiguous span of the text. Header cells are kept as they are.
    """
    words = record.text.split()
    tables = []
    for t in record.tables:
        rows = []
        for i, row in enumerate(t.rows, start=1):
            rows.append(tuple(
                content if (not content or t.is_header_cell(i, j)
                            or _contains_span(words, content.split())) else ""
                for j, content in enumerate(row, start=1)
            ))
        tables.append(replace(t, rows=tuple(rows)))
    return replace(record, tables=tuple(tables))


# ============================================
# STATISTICS
# ============================================

@dataclass(frozen=True)
class PoolStats:
    """Table shape statistics for one caption pool."""

    n_tables: int
    mean_rows: float
    mean_cols: float
    n_cells: int
    n_nonempty: int

    @property
    def nonempty_ratio(self) -> float:
        return self.n_nonempty / self.n_cells if self.n_cells else 0.0


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    mean_text_tokens: float
    mean_target_tokens: float
    pools: Dict[str, PoolStats]


def serialized_length(d: Document) -> int:
    """Token count of the <bos> ... <eos> serialization of a document."""
    total = 2 + (len(d.tables) - 1)
    for t in d.tables:
        if t.caption is not None:
            total += len(t.caption.split()) + 1
        total += t.n_rows - 1
        for row in t.rows:
            total += 1 + sum(len(c.split()) + 1 for c in row)
    return total


def pool_name(t: Table) -> str:
    return t.caption if t.caption is not None else "table"


def corpus_stats(records: Sequence[DatasetRecord]) -> DatasetStats:
    """
    Mean token counts per instance and, per caption pool, mean rows and
    columns plus the count and ratio of non-empty non-header cells.
    """
    shapes: Dict[str, List[Tuple[int, int, int, int]]] = defaultdict(list)
    for r in records:
        for t in r.tables:
            cells = [t.cell(i, j) for i in range(1, t.n_rows + 1) for j in range(1, t.n_cols + 1)
                     if not t.is_header_cell(i, j)]
            shapes[pool_name(t)].append((t.n_rows, t.n_cols, len(cells), sum(1 for c in cells if c)))

    pools = {
        name: PoolStats(
            n_tables=len(rows),
            mean_rows=sum(s[0] for s in rows) / len(rows),
            mean_cols=sum(s[1] for s in rows) / len(rows),
            n_cells=sum(s[2] for s in rows),
            n_nonempty=sum(s[3] for s in rows),
        )
        for name, rows in sorted(shapes.items())
    }
    n = len(records)
    return DatasetStats(
        n_instances=n,
        mean_text_tokens=sum(len(r.text.split()) for r in records) / n if n else 0.0,
        mean_target_tokens=sum(serialized_length(r.document()) for r in records) / n if n else 0.0,
        pools=pools,
    )


def split_records(records: Sequence[DatasetRecord], valid_fraction: float,
                  ) -> Tuple[List[DatasetRecord], List[DatasetRecord]]:
    """Deterministic head/tail split; the tail is the validation part."""
    if not 0.0 <= valid_fraction < 1.0:
        raise ValueError(f"valid_fraction must be in [0, 1), got {valid_fraction}.")
    n_valid = int(round(len(records) * valid_fraction))
    cut = len(records) - n_valid
    return list(records[:cut]), list(records[cut:])


def first_header_mode(records: Sequence[DatasetRecord]) -> Optional[HeaderMode]:
    for r in records:
        if r.tables:
            return r.tables[0].header_mode
    return None
