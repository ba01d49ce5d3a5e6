"""Answer-set evaluation metrics and eval-file loading.

Answers are normalized (lowercase, trimmed, inner whitespace collapsed)
before comparison. Predictions and golds are JSONL: predictions
``{"id": ..., "prediction": [...]}``, golds ``{"id": ..., "gold": [...]}``;
a bare string is accepted where a list is expected.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, DocumentError

logger = logging.getLogger(__name__)

METRICS = ("hit1", "f1", "recall", "acc")


@dataclass(frozen=True)
class EvalRecord:
    id: str
    prediction: tuple[str, ...]
    gold: tuple[str, ...]

    def __post_init__(self):
        if not self.gold:
            raise DataError(f"record {self.id!r}: gold answer list is empty")


def normalize_answer(text: str) -> str:
    return " ".join(text.lower().split())


def _score_record(record: EvalRecord, metric: str) -> float:
    preds = [normalize_answer(p) for p in record.prediction]
    golds = {normalize_answer(a) for a in record.gold}

    if metric == "hit1":
        return 1.0 if preds and preds[0] in golds else 0.0

    if metric == "acc":
        if len(record.prediction) != 1:
            raise DataError(
                f"record {record.id!r}: acc needs exactly one prediction, "
                f"got {len(record.prediction)}"
            )
        return 1.0 if preds[0] in golds else 0.0

    pred_set = set(preds)
    inter = len(pred_set & golds)
    if metric == "recall":
        return inter / len(golds)

    if metric == "f1":
        if not pred_set or inter == 0:
            return 0.0
        precision = inter / len(pred_set)
        recall = inter / len(golds)
        return 2.0 * precision * recall / (precision + recall)

    raise ValueError(f"unknown metric {metric!r}")


def compute_metric(records: list[EvalRecord], metric: str) -> float:
    """Average the per-record metric; result is always in [0, 1]."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if not records:
        raise ValueError("compute_metric needs at least one record")
    return sum(_score_record(r, metric) for r in records) / len(records)


def _read_jsonl(path: Path, value_key: str) -> dict[str, tuple[str, ...]]:
    out: dict[str, tuple[str, ...]] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{path} line {lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(rec, dict) or "id" not in rec or value_key not in rec:
            raise DocumentError(
                f"{path} line {lineno}: expected object with 'id' and {value_key!r}"
            )
        rid = str(rec["id"])
        if rid in out:
            raise DataError(f"{path} line {lineno}: duplicate id {rid!r}")
        value = rec[value_key]
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise DocumentError(
                f"{path} line {lineno}: {value_key!r} must be a string or list of strings"
            )
        out[rid] = tuple(value)
    return out


def load_eval_files(pred_path: str | Path, gold_path: str | Path) -> list[EvalRecord]:
    """Join prediction and gold JSONL files on id, sorted by id."""
    preds = _read_jsonl(Path(pred_path), "prediction")
    golds = _read_jsonl(Path(gold_path), "gold")

    missing = sorted(set(preds) - set(golds))
    if missing:
        raise DataError(f"predictions with no gold answers: {missing}")
    unmatched = sorted(set(golds) - set(preds))
    if unmatched:
        logger.warning("gold ids with no prediction (skipped): %s", unmatched)

    return [
        EvalRecord(id=rid, prediction=preds[rid], gold=golds[rid])
        for rid in sorted(preds)
    ]
