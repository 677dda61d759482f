"""Small argument checks shared across modules."""

import numbers

import numpy as np


def check_counts(counts, name="counts"):
    """Return ``counts`` as an int64 array, requiring C >= 2 and every n_i >= 1."""
    arr = np.asarray(counts)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"{name} needs at least 2 classes, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        raise ValueError(f"{name} must hold integers, got {arr.tolist()}")
    arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise ValueError(f"every class count must be >= 1, got {arr.tolist()}")
    return arr


def check_unit_interval(value, name, *, low_open=False, high_open=False):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real, got {value!r}")
    lo_ok = value > 0 if low_open else value >= 0
    hi_ok = value < 1 if high_open else value <= 1
    if not (lo_ok and hi_ok):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value}")
    return float(value)


def check_class_index(index, num_classes, name="class index"):
    if isinstance(index, (bool, np.bool_)) or not isinstance(index, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {index!r}")
    if not 0 <= index < num_classes:
        raise IndexError(f"{name} {index} out of range for {num_classes} classes")
    return int(index)


def check_epoch(epoch):
    if isinstance(epoch, (bool, np.bool_)) or not isinstance(epoch, numbers.Integral):
        raise TypeError(f"epoch must be an integer, got {epoch!r}")
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return int(epoch)


def check_finite_logits(logits):
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    return z


def check_random_state(seed):
    """Accept None, an int seed, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
