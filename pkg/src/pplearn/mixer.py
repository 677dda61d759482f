"""Mixup with imbalance-aware label factors.

The image factor ``lambda_x`` is drawn from a symmetric beta distribution.
The label factor ``lambda_y`` follows the Remix rule: when the first sample
comes from a class at least ``kappa`` times larger than the second and the
mix is dominated by the second (``lambda_x < tau``), the label is pushed to
``lambda0``; symmetrically to ``lambda1`` for the reverse case. Remix fixes
``(lambda0, lambda1) = (0, 1)``, while the phased variant relaxes them from
``lambda_x`` to ``(0, 1)`` along the shared schedule.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_random_state, check_unit_interval
from .schedules import mix_bounds_at, progress_at

__all__ = ["MIX_MODES", "MixConfig", "MixedExample", "label_lambda", "mix_bounds", "mix_pair", "mix_batch"]

MIX_MODES = ("none", "mixup", "remix", "ppmix")


@dataclass(frozen=True)
class MixConfig:
    mode: str = "ppmix"
    kappa: float = 3.0
    tau: float = 0.5
    beta_param: float = 1.0

    def __post_init__(self):
        if self.mode not in MIX_MODES:
            raise ValueError(f"unknown mix mode {self.mode!r}; expected one of {MIX_MODES}")
        if not math.isfinite(self.kappa) or self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        check_unit_interval(self.tau, "tau")
        if not math.isfinite(self.beta_param) or self.beta_param <= 0:
            raise ValueError(f"beta_param must be > 0, got {self.beta_param}")


@dataclass(frozen=True)
class MixedExample:
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    lambda_x: float
    lambda_y: float


def label_lambda(cfg, lambda_x, n1, n2, lambda0, lambda1):
    """Label mixing factor for a pair with class sizes ``n1`` and ``n2``.

    The first branch wins when both conditions hold (possible only for
    ``tau > 0.5``).
    """
    if n1 < 1 or n2 < 1:
        raise ValueError(f"class counts must be >= 1, got {n1}, {n2}")
    check_unit_interval(lambda_x, "lambda_x")
    if cfg.mode in ("none", "mixup"):
        return lambda_x
    ratio = n1 / n2
    if ratio >= cfg.kappa and lambda_x < cfg.tau:
        return lambda0
    if ratio <= 1.0 / cfg.kappa and lambda_x > 1.0 - cfg.tau:
        return lambda1
    return lambda_x


def mix_bounds(cfg, schedule, epoch, lambda_x):
    if cfg.mode == "remix":
        return 0.0, 1.0
    if cfg.mode == "ppmix":
        return mix_bounds_at(schedule, epoch, lambda_x)
    return lambda_x, lambda_x


def mix_pair(cfg, schedule, epoch, x1, y1, n1, x2, y2, n2, rng=None, lambda_x=None):
    """Mix two examples; ``lambda_x`` is drawn from ``rng`` unless given."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError(f"feature shapes differ: {x1.shape} vs {x2.shape}")
    if y1.shape != y2.shape:
        raise ValueError(f"label shapes differ: {y1.shape} vs {y2.shape}")
    if lambda_x is None:
        rng = check_random_state(rng)
        lambda_x = float(rng.beta(cfg.beta_param, cfg.beta_param))
    lambda0, lambda1 = mix_bounds(cfg, schedule, epoch, lambda_x)
    lambda_y = label_lambda(cfg, lambda_x, n1, n2, lambda0, lambda1)
    return MixedExample(
        x_tilde=lambda_x * x1 + (1.0 - lambda_x) * x2,
        y_tilde=lambda_y * y1 + (1.0 - lambda_y) * y2,
        lambda_x=lambda_x,
        lambda_y=lambda_y,
    )


def mix_batch(cfg, schedule, epoch, X, y, counts, rng):
    """Mix a batch against a shuffled copy of itself.

    Returns ``(X_mixed, partner_labels, lambda_y)`` so that the soft target
    of row ``i`` is ``lambda_y[i] * onehot(y[i]) + (1 - lambda_y[i]) *
    onehot(partner_labels[i])``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    counts = np.asarray(counts)
    perm = rng.permutation(y.size)
    lam_x = rng.beta(cfg.beta_param, cfg.beta_param, size=y.size)
    X_mixed = lam_x[:, None] * X + (1.0 - lam_x[:, None]) * X[perm]
    y2 = y[perm]
    if cfg.mode in ("none", "mixup"):
        return X_mixed, y2, lam_x

    if cfg.mode == "remix":
        lam0 = np.zeros_like(lam_x)
        lam1 = np.ones_like(lam_x)
    else:
        f = progress_at(schedule, epoch)
        lam0 = lam_x * (1.0 - f)
        lam1 = lam0 + f
    ratio = counts[y] / counts[y2]
    first = (ratio >= cfg.kappa) & (lam_x < cfg.tau)
    second = ~first & (ratio <= 1.0 / cfg.kappa) & (lam_x > 1.0 - cfg.tau)
    lam_y = np.where(first, lam0, np.where(second, lam1, lam_x))
    return X_mixed, y2, lam_y
