"""Accuracy bookkeeping: per-class and head/medium/tail breakdowns,
per-epoch run records and cross-seed aggregation."""

import csv
from dataclasses import asdict, dataclass, field
import io
import json
import math

import numpy as np

from .histogram import as_counts

__all__ = [
    "EvalResult",
    "EpochRow",
    "RunRecord",
    "confusion_matrix",
    "evaluate_predictions",
    "hmt_split",
    "hmt_thresholds",
    "bucket_accuracy",
    "aggregate",
]

BUCKETS = ("head", "medium", "tail")


@dataclass(frozen=True)
class EvalResult:
    overall: float
    per_class: np.ndarray
    confusion: np.ndarray

    @property
    def balanced(self):
        return float(np.mean(self.per_class))


def confusion_matrix(y_true, y_pred, num_classes):
    """Rows are true classes, columns predictions."""
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def evaluate_predictions(y_true, scores, num_classes):
    """Top-1 accuracy from a score matrix; ties go to the lowest class index."""
    scores = np.asarray(scores)
    if scores.ndim != 2 or scores.shape[1] != num_classes:
        raise ValueError(f"scores must have shape (n, {num_classes}), got {scores.shape}")
    y_true = np.asarray(y_true)
    if scores.shape[0] != y_true.size:
        raise ValueError(f"{scores.shape[0]} score rows for {y_true.size} labels")
    pred = np.argmax(scores, axis=1)
    cm = confusion_matrix(y_true, pred, num_classes)
    support = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(support > 0, np.diag(cm) / np.maximum(support, 1), np.nan)
    overall = float(np.trace(cm) / y_true.size) if y_true.size else math.nan
    return EvalResult(overall, per_class, cm)


def hmt_thresholds(n_max, head_frac=0.24, tail_frac=0.04):
    """Absolute head/tail thresholds as fractions of the largest class."""
    return head_frac * n_max, tail_frac * n_max


def hmt_split(hist, head_min, tail_max):
    """Partition classes: head ``n >= head_min``, tail ``n < tail_max``,
    medium otherwise. Buckets may be empty."""
    if tail_max > head_min:
        raise ValueError(f"tail threshold {tail_max} exceeds head threshold {head_min}")
    counts = as_counts(hist)
    head = np.flatnonzero(counts >= head_min)
    tail = np.flatnonzero(counts < tail_max)
    medium = np.flatnonzero((counts < head_min) & (counts >= tail_max))
    return {"head": head, "medium": medium, "tail": tail}


def bucket_accuracy(per_class, buckets):
    """Mean per-class accuracy of each bucket; NaN for an empty bucket."""
    per_class = np.asarray(per_class)
    return {
        name: float(np.mean(per_class[idx])) if len(idx) else math.nan
        for name, idx in buckets.items()
    }


@dataclass
class EpochRow:
    epoch: int
    lr: float
    alpha: float
    q: float
    train_loss: float
    val_acc: float
    head_acc: float
    medium_acc: float
    tail_acc: float
    per_class: list


@dataclass
class RunRecord:
    num_classes: int
    rows: list = field(default_factory=list)

    def append(self, row):
        self.rows.append(row)

    @property
    def final(self):
        return self.rows[-1]

    @property
    def best(self):
        return max(self.rows, key=lambda r: (r.val_acc, -r.epoch))

    def columns(self):
        base = ["epoch", "lr", "alpha", "q", "train_loss", "val_acc", "head_acc", "medium_acc", "tail_acc"]
        return base + [f"class_{c}_acc" for c in range(self.num_classes)]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        for r in self.rows:
            writer.writerow(
                [r.epoch]
                + [_fmt(v) for v in (r.lr, r.alpha, r.q, r.train_loss, r.val_acc, r.head_acc, r.medium_acc, r.tail_acc)]
                + [_fmt(v) for v in r.per_class]
            )
        return buf.getvalue()

    def summary(self):
        final, best = self.final, self.best
        return {
            "epochs": len(self.rows),
            "final_epoch": final.epoch,
            "final_acc": final.val_acc,
            "final_head_acc": final.head_acc,
            "final_medium_acc": final.medium_acc,
            "final_tail_acc": final.tail_acc,
            "final_per_class": list(final.per_class),
            "best_epoch": best.epoch,
            "best_acc": best.val_acc,
        }

    def summary_json(self, **extra):
        doc = dict(extra)
        doc.update(self.summary())
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"

    def to_dict(self):
        return {"num_classes": self.num_classes, "rows": [asdict(r) for r in self.rows]}


def _fmt(value):
    return repr(float(value))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def aggregate(values):
    """Mean and population standard deviation over seeds, ignoring NaNs."""
    arr = np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    return float(arr.mean()), float(arr.std())
