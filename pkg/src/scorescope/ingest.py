"""Readers, writers and core record types for the three input file formats.

Score logs are line-delimited JSON (one prediction event per line), paired
predictions and tabular datasets are CSV with a header row. All readers are
pure functions over files: order preserving, deterministic, and safe to call
concurrently on distinct inputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

# cell spellings treated as a missing value in tabular CSVs
_MISSING_TOKENS = frozenset({"", "na", "nan", "null"})

# fraction of malformed score-log lines tolerated before the whole read aborts
MALFORMED_LINE_LIMIT = 0.10


@dataclass(frozen=True)
class ScoreRecord:
    """One serving-time prediction event emitted by a scoring model."""

    model_id: str
    ts: int
    score: float
    entity_id: str | None = None
    class_label: str | None = None
    true_label: int | None = None


@dataclass(frozen=True)
class PairedPrediction:
    """One entity scored by two models, the unit of disagreement analysis."""

    entity_id: str
    pred_a: float
    pred_b: float
    true_label: int | None = None


@dataclass(frozen=True)
class TabularDataset:
    """Numeric feature matrix plus a binary target vector."""

    feature_names: tuple[str, ...]
    rows: np.ndarray  # (n, arity) float64
    target: np.ndarray  # (n,) int8, values in {0, 1}

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def arity(self) -> int:
        return self.rows.shape[1]


@dataclass
class ScoreLog:
    """Parsed score log: validated records plus skip bookkeeping."""

    records: list[ScoreRecord]
    skipped: int = 0
    skipped_lines: list[tuple[int, str]] = field(default_factory=list)
    rescaled: bool = False

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


class _MalformedLine(ValueError):
    pass


def _parse_optional_label(value) -> int | None:
    if value is None:
        return None
    if value in (0, 1):
        return int(value)
    raise _MalformedLine(f"label must be 0 or 1, got {value!r}")


def parse_score_line(line: str, line_no: int, *, allow_out_of_range: bool = False) -> ScoreRecord:
    """Parse one score-log line.

    Raises InputError when the score is a number outside [0, 1] and
    ``allow_out_of_range`` is off (rescaling is the remedy, not skipping),
    and _MalformedLine for anything else wrong with the line.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise _MalformedLine(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise _MalformedLine("line is not an object")
    model_id = obj.get("model_id")
    if not isinstance(model_id, str) or not model_id:
        raise _MalformedLine("missing or invalid model_id")
    ts = obj.get("ts")
    if not isinstance(ts, int) or isinstance(ts, bool) or ts < 0:
        raise _MalformedLine("ts must be a non-negative integer")
    score = obj.get("score")
    if not isinstance(score, (int, float)) or isinstance(score, bool) or not math.isfinite(score):
        raise _MalformedLine("score must be a finite number")
    score = float(score)
    if not allow_out_of_range and not 0.0 <= score <= 1.0:
        raise InputError(f"line {line_no}: score {score} outside [0, 1] (use rescale to min-max rescale the file)")
    entity_id = obj.get("entity_id")
    if entity_id is not None and not isinstance(entity_id, str):
        raise _MalformedLine("entity_id must be a string")
    class_label = obj.get("class")
    if class_label is not None and not isinstance(class_label, str):
        raise _MalformedLine("class must be a string")
    label = _parse_optional_label(obj.get("label"))
    return ScoreRecord(model_id, ts, score, entity_id, class_label, label)


def read_score_log(path: str | Path, *, rescale: bool = False) -> ScoreLog:
    """Read a line-delimited score log.

    Malformed lines are skipped and counted. A single bad line is always
    tolerated (a writer may have been interrupted mid-record); beyond that,
    more than ``MALFORMED_LINE_LIMIT`` of the lines being malformed aborts
    the read. Scores outside [0, 1] are an error unless ``rescale`` is set,
    in which case the whole file is min-max rescaled onto [0, 1] after
    parsing.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read score log {path}: {exc}") from exc

    records: list[ScoreRecord] = []
    skipped: list[tuple[int, str]] = []
    total = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        total += 1
        try:
            records.append(parse_score_line(line, line_no, allow_out_of_range=rescale))
        except _MalformedLine as exc:
            skipped.append((line_no, str(exc)))
    if len(skipped) > 1 and len(skipped) / total > MALFORMED_LINE_LIMIT:
        raise InputError(
            f"{path}: {len(skipped)} of {total} lines malformed "
            f"(limit {MALFORMED_LINE_LIMIT:.0%}); first: line {skipped[0][0]}: {skipped[0][1]}"
        )
    if rescale and records:
        records = _rescale_records(records)
    return ScoreLog(records, skipped=len(skipped), skipped_lines=skipped, rescaled=rescale)


def _rescale_records(records: list[ScoreRecord]) -> list[ScoreRecord]:
    scores = np.array([r.score for r in records], dtype=np.float64)
    lo, hi = float(scores.min()), float(scores.max())
    if hi > lo:
        rescaled = (scores - lo) / (hi - lo)
    else:
        rescaled = np.full_like(scores, 0.5)  # constant file: midpoint
    return [
        ScoreRecord(r.model_id, r.ts, float(s), r.entity_id, r.class_label, r.true_label)
        for r, s in zip(records, rescaled)
    ]


def write_score_log(records: Iterable[ScoreRecord], path: str | Path) -> None:
    """Write records in the same line-delimited format ``read_score_log`` accepts."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for r in records:
            obj: dict = {"model_id": r.model_id, "ts": r.ts, "score": r.score}
            if r.entity_id is not None:
                obj["entity_id"] = r.entity_id
            if r.class_label is not None:
                obj["class"] = r.class_label
            if r.true_label is not None:
                obj["label"] = r.true_label
            fh.write(json.dumps(obj) + "\n")


def _parse_unit_score(value: str, row_no: int, column: str) -> float:
    try:
        score = float(value)
    except ValueError as exc:
        raise InputError(f"row {row_no}: column {column!r} is not numeric: {value!r}") from exc
    if not 0.0 <= score <= 1.0:
        raise InputError(f"row {row_no}: column {column!r} value {score} outside [0, 1]")
    return score


def read_paired(path: str | Path) -> list[PairedPrediction]:
    """Read a paired-prediction CSV with header ``entity_id,pred_a,pred_b[,label]``."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file, expected a header row") from None
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"cannot read paired CSV {path}: {exc}") from exc

    header = [h.strip() for h in header]
    if header not in (["entity_id", "pred_a", "pred_b"], ["entity_id", "pred_a", "pred_b", "label"]):
        raise InputError(
            f"{path}: header must be entity_id,pred_a,pred_b[,label], got {','.join(header)}"
        )
    has_label = len(header) == 4
    out: list[PairedPrediction] = []
    for row_no, row in enumerate(rows, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise InputError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        entity = row[0].strip()
        if not entity:
            raise InputError(f"row {row_no}: empty entity_id")
        pred_a = _parse_unit_score(row[1].strip(), row_no, "pred_a")
        pred_b = _parse_unit_score(row[2].strip(), row_no, "pred_b")
        label: int | None = None
        if has_label:
            cell = row[3].strip()
            if cell:
                if cell not in ("0", "1"):
                    raise InputError(f"row {row_no}: label must be 0 or 1, got {cell!r}")
                label = int(cell)
        out.append(PairedPrediction(entity, pred_a, pred_b, label))
    return out


def read_tabular(path: str | Path, target_column: str, *, impute: bool = False) -> TabularDataset:
    """Read a feature CSV; features are all non-target columns in header order.

    The target column must be binary {0, 1} with no missing values. Missing
    feature cells are an error unless ``impute`` is set, in which case they
    are replaced by the column mean of the observed values.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise InputError(f"{path}: empty file, expected a header row") from None
            rows = [row for row in reader if any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputError(f"cannot read tabular CSV {path}: {exc}") from exc

    if target_column not in header:
        raise InputError(f"{path}: target column {target_column!r} not in header {header}")
    target_idx = header.index(target_column)
    feature_names = tuple(name for i, name in enumerate(header) if i != target_idx)

    n = len(rows)
    features = np.empty((n, len(feature_names)), dtype=np.float64)
    target = np.empty(n, dtype=np.int8)
    for i, row in enumerate(rows):
        row_no = i + 2
        if len(row) != len(header):
            raise InputError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        cell = row[target_idx].strip()
        if cell not in ("0", "1"):
            raise InputError(f"row {row_no}: target {target_column!r} must be 0 or 1, got {cell!r}")
        target[i] = int(cell)
        j = 0
        for k, raw in enumerate(row):
            if k == target_idx:
                continue
            cell = raw.strip()
            if cell.lower() in _MISSING_TOKENS:
                if not impute:
                    raise InputError(
                        f"row {row_no}: missing value in column {feature_names[j]!r} (use impute to mean-fill)"
                    )
                features[i, j] = np.nan
            else:
                try:
                    features[i, j] = float(cell)
                except ValueError as exc:
                    raise InputError(
                        f"row {row_no}: column {feature_names[j]!r} is not numeric: {cell!r}"
                    ) from exc
            j += 1

    if impute and n > 0:
        for j in range(features.shape[1]):
            col = features[:, j]
            mask = np.isnan(col)
            if mask.all():
                raise InputError(f"column {feature_names[j]!r} has no observed values to impute from")
            if mask.any():
                col[mask] = col[~mask].mean()
    if n > 0 and not np.isfinite(features).all():
        bad = np.argwhere(~np.isfinite(features))[0]
        raise InputError(f"row {int(bad[0]) + 2}: non-finite value in column {feature_names[int(bad[1])]!r}")
    return TabularDataset(feature_names, features, target)


def dataset_from_arrays(feature_names: Sequence[str], rows, target) -> TabularDataset:
    """Build a validated TabularDataset from in-memory arrays."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise InputError("rows must be a 2-d matrix")
    target = np.asarray(target)
    if target.shape != (rows.shape[0],):
        raise InputError("target length must match row count")
    if not np.isin(target, (0, 1)).all():
        raise InputError("target must be binary {0, 1}")
    if rows.size and not np.isfinite(rows).all():
        raise InputError("features must be finite")
    if len(feature_names) != rows.shape[1]:
        raise InputError("feature_names arity mismatch")
    return TabularDataset(tuple(feature_names), rows, target.astype(np.int8))
