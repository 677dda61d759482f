from dataclasses import dataclass

import numpy as np

from ._validation import check_counts


@dataclass(frozen=True, eq=False)
class ClassHistogram:
    """Per-class training counts ``n_i``."""

    counts: np.ndarray

    def __post_init__(self):
        arr = check_counts(self.counts)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @classmethod
    def from_labels(cls, labels, num_classes=None):
        labels = np.asarray(labels, dtype=np.int64)
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if labels.size else 0
        return cls(np.bincount(labels, minlength=num_classes))

    @property
    def num_classes(self):
        return int(self.counts.size)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def imbalance_factor(self):
        return float(self.counts.max() / self.counts.min())

    def __len__(self):
        return self.num_classes

    def __eq__(self, other):
        if not isinstance(other, ClassHistogram):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"ClassHistogram({self.counts.tolist()})"


def as_counts(hist):
    """Counts vector from a :class:`ClassHistogram` or any integer sequence."""
    if isinstance(hist, ClassHistogram):
        return hist.counts
    return check_counts(hist)
