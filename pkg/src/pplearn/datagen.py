"""Imbalanced dataset construction.

Synthetic data is a Gaussian mixture: one isotropic Gaussian per class with
means at distance ``class_sep`` from the origin along random directions.
Class sizes follow a long-tailed (geometric) or step profile with a target
imbalance factor ``n_max / n_min``.
"""

import csv
from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_random_state
from .histogram import ClassHistogram

__all__ = [
    "ImbalanceProfile",
    "Dataset",
    "TabularFormatError",
    "profile_counts",
    "synth_gaussians",
    "apply_qr",
    "load_tabular",
    "save_tabular",
]

PROFILES = ("lt", "step")


class TabularFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


@dataclass(frozen=True)
class ImbalanceProfile:
    kind: str = "lt"
    imbalance_factor: float = 100.0
    n_max: int = 500
    num_classes: int = 10

    def __post_init__(self):
        if self.kind not in PROFILES:
            raise ValueError(f"unknown profile {self.kind!r}; expected one of {PROFILES}")
        if not math.isfinite(self.imbalance_factor) or self.imbalance_factor < 1:
            raise ValueError(f"imbalance factor must be >= 1, got {self.imbalance_factor}")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: str = "train"

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"{y.size} labels for {X.shape[0]} feature rows")
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def histogram(self):
        return ClassHistogram.from_labels(self.labels, self.num_classes)

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_classes)

    @property
    def n_samples(self):
        return int(self.labels.size)

    @property
    def n_features(self):
        return int(self.features.shape[1])


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def profile_counts(profile):
    """Class sizes for a profile, nonincreasing in the class index.

    ``lt``: ``round(n_max * IF**(-i / (C - 1)))``.
    ``step``: the first ``ceil(C / 2)`` classes get ``n_max``, the rest
    ``round(n_max / IF)``.
    """
    C = profile.num_classes
    imb = float(profile.imbalance_factor)
    if profile.kind == "lt":
        exponents = -np.arange(C) / (C - 1)
        counts = _round_half_up(profile.n_max * imb**exponents)
    else:
        n_head = math.ceil(C / 2)
        counts = np.full(C, profile.n_max, dtype=np.int64)
        counts[n_head:] = _round_half_up(profile.n_max / imb)
    if counts.min() < 1:
        raise ValueError(
            f"profile gives an empty class: n_max={profile.n_max} is below imbalance factor {imb}"
        )
    return ClassHistogram(counts)


def class_means(num_classes, dim, class_sep, rng):
    directions = rng.standard_normal((num_classes, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return class_sep * directions


def synth_gaussians(counts, dim=20, class_sep=2.0, noise=1.0, seed=0, val_per_class=100):
    """Sample a training set with the given class counts and a balanced
    validation set with ``val_per_class`` examples per class.

    Returns ``(train, validation, means)``.
    """
    hist = counts if isinstance(counts, ClassHistogram) else ClassHistogram(counts)
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if class_sep <= 0:
        raise ValueError(f"class_sep must be > 0, got {class_sep}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    rng = check_random_state(seed)
    C = hist.num_classes
    means = class_means(C, dim, class_sep, rng)

    def draw(sizes, split):
        y = np.repeat(np.arange(C), sizes)
        X = means[y] + noise * rng.standard_normal((y.size, dim))
        return Dataset(X, y, C, split)

    train = draw(hist.counts, "train")
    validation = draw(np.full(C, val_per_class), "validation")
    return train, validation, means


def apply_qr(ds, qr, seed=0):
    """Keep ``round(qr * n_i)`` (at least one) examples of every class.

    Selection uses one label-independent permutation of the rows, so the
    result does not depend on how classes are numbered.
    """
    if not (0 < qr <= 1):
        raise ValueError(f"qr must lie in (0, 1], got {qr}")
    if qr == 1:
        return ds
    rng = check_random_state(seed)
    order = rng.permutation(ds.n_samples)
    labels = ds.labels[order]
    keep = []
    for c in range(ds.num_classes):
        members = order[labels == c]
        if members.size == 0:
            continue
        k = max(1, int(_round_half_up(qr * members.size)))
        keep.append(members[:k])
    idx = np.sort(np.concatenate(keep))
    return Dataset(ds.features[idx], ds.labels[idx], ds.num_classes, ds.split)


def load_tabular(path, has_header=False, num_classes=None, delimiter=","):
    """Read ``D`` numeric feature columns followed by an integer label.

    ``num_classes`` defaults to ``max(label) + 1``; every class in range
    must be present.
    """
    rows = []
    labels = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) < 2:
                raise TabularFormatError(f"line {lineno}: need at least one feature and a label")
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise TabularFormatError(
                    f"line {lineno}: expected {width} columns, found {len(record)}"
                )
            try:
                feats = [float(cell) for cell in record[:-1]]
            except ValueError as exc:
                raise TabularFormatError(f"line {lineno}: non-numeric feature ({exc})") from None
            if not all(math.isfinite(v) for v in feats):
                raise TabularFormatError(f"line {lineno}: non-finite feature")
            raw = record[-1].strip()
            try:
                label = int(raw)
            except ValueError:
                raise TabularFormatError(f"line {lineno}: label {raw!r} is not an integer") from None
            if label < 0 or (num_classes is not None and label >= num_classes):
                raise TabularFormatError(f"line {lineno}: unknown label {label}")
            rows.append(feats)
            labels.append(label)
    if not rows:
        raise TabularFormatError(f"{path}: no data rows")
    y = np.asarray(labels, dtype=np.int64)
    C = num_classes if num_classes is not None else int(y.max()) + 1
    counts = np.bincount(y, minlength=C)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ValueError(f"{path}: classes {empty.tolist()} have no examples")
    if C < 2:
        raise ValueError(f"{path}: need at least 2 classes, found {C}")
    return Dataset(np.asarray(rows, dtype=np.float64), y, C)


def save_tabular(ds, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for x, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(label)])
