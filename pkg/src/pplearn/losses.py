"""Classification losses with analytic gradients with respect to the logits.

Four families are supported:

* ``ce``: cross-entropy ``-log p_y``.
* ``focal``: ``(1 - p_y)**gamma * (-log p_y)``.
* ``ldam``: cross-entropy on logits whose true-class entry is shifted down
  by the class margin ``S / n_y**0.25``.
* ``cri``: the focal-modulated LDAM loss above a probability threshold
  ``T``; below it the loss is replaced by a correction term ``sigma`` so that
  outliers with vanishing ``p_y`` cannot produce unbounded losses.

Everything is vectorized over a batch; :func:`loss_forward` and
:func:`loss_grad` are single-example conveniences on top of
:func:`loss_terms`.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_class_index, check_finite_logits
from .histogram import as_counts

__all__ = [
    "LossConfig",
    "LossOutput",
    "class_weight",
    "class_weights",
    "softmax_prob",
    "ldam_margin",
    "class_margins",
    "loss_terms",
    "loss_forward",
    "loss_grad",
    "sigma_cap",
]

FAMILIES = ("ce", "focal", "ldam", "cri")
SIGMA_VARIANTS = ("zero", "constant", "linear", "none")

# -log(1e-300): value cap used when p_y underflows.
LOG_PROB_FLOOR = math.log(1e-300)


@dataclass(frozen=True)
class LossConfig:
    """Loss family and hyperparameters.

    ``s`` is the LDAM margin scale. When it is ``None`` the scale is picked
    per histogram so that the rarest class gets margin ``max_margin``.
    ``shifted_focus`` selects whether the CRI modulating factor and
    threshold test use the margin-shifted probability (default) or the plain
    softmax probability.
    """

    family: str = "cri"
    gamma: float = 1.5
    s: float | None = None
    max_margin: float = 0.5
    t_threshold: float = 1e-6
    sigma: str = "linear"
    shifted_focus: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown loss family {self.family!r}; expected one of {FAMILIES}")
        if self.sigma not in SIGMA_VARIANTS:
            raise ValueError(f"unknown sigma variant {self.sigma!r}; expected one of {SIGMA_VARIANTS}")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.s is not None and (not math.isfinite(self.s) or self.s < 0):
            raise ValueError(f"s must be >= 0, got {self.s}")
        if not math.isfinite(self.max_margin) or self.max_margin < 0:
            raise ValueError(f"max_margin must be >= 0, got {self.max_margin}")
        if not (0.0 <= self.t_threshold < 1.0):
            raise ValueError(f"t_threshold must lie in [0, 1), got {self.t_threshold}")

    @property
    def uses_margin(self):
        return self.family in ("ldam", "cri")

    @property
    def uses_focus(self):
        return self.family in ("focal", "cri")

    def scale_for(self, hist):
        """LDAM scale ``S`` for a histogram."""
        if self.s is not None:
            return float(self.s)
        counts = as_counts(hist)
        return self.max_margin * float(counts.min()) ** 0.25


@dataclass(frozen=True)
class LossOutput:
    value: float
    grad: np.ndarray


def class_weight(hist, class_index, alpha):
    """Re-weighting factor ``(1 / n_i) ** alpha``."""
    counts = as_counts(hist)
    i = check_class_index(class_index, counts.size)
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return float(counts[i]) ** (-alpha)


def class_weights(hist, alpha):
    counts = as_counts(hist).astype(np.float64)
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return counts ** (-float(alpha))


def ldam_margin(hist, y, s):
    counts = as_counts(hist)
    i = check_class_index(y, counts.size)
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    return s * float(counts[i]) ** -0.25


def class_margins(cfg, hist):
    """Per-class additive logit margins; all zero for families without one."""
    counts = as_counts(hist).astype(np.float64)
    if not cfg.uses_margin:
        return np.zeros_like(counts)
    return cfg.scale_for(counts) * counts**-0.25


def softmax_prob(logits, y, margin=0.0):
    """True-class probability after subtracting ``margin`` from ``z_y``."""
    z = check_finite_logits(logits).copy()
    y = check_class_index(y, z.size)
    z[y] -= margin
    z -= z.max()
    ez = np.exp(z)
    return float(ez[y] / ez.sum())


def sigma_cap(cfg):
    """Largest value the CRI correction can reach, ``(1-T)**gamma * (-log T)``."""
    t = cfg.t_threshold
    if t == 0.0:
        return math.inf
    return (1.0 - t) ** cfg.gamma * -math.log(t)


def _softmax_parts(z, y):
    rows = np.arange(z.shape[0])
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    total = ez.sum(axis=1)
    p = ez / total[:, None]
    p_y = p[rows, y]
    # 1 - p_y from the off-target mass keeps precision when p_y is near 1.
    rest = (total - ez[rows, y]) / total
    log_p_y = shifted[rows, y] - np.log(total)
    return p, p_y, rest, log_p_y


def loss_terms(cfg, hist, logits, y):
    """Per-example loss values and gradients for a batch.

    Parameters
    ----------
    cfg : LossConfig
    hist : ClassHistogram or sequence of int
        Training class counts (used for the LDAM margins).
    logits : array of shape (B, C)
    y : int array of shape (B,)

    Returns
    -------
    values : array of shape (B,)
    grads : array of shape (B, C)
        ``d values[b] / d logits[b]``.
    """
    z = check_finite_logits(logits)
    if z.ndim != 2:
        raise ValueError(f"logits must be 2-D (batch, classes), got shape {z.shape}")
    y = np.asarray(y, dtype=np.int64)
    n_rows, n_classes = z.shape
    if y.shape != (n_rows,):
        raise ValueError(f"labels shape {y.shape} does not match {n_rows} logit rows")
    if n_rows and (y.min() < 0 or y.max() >= n_classes):
        raise IndexError("label out of range")
    rows = np.arange(n_rows)

    if cfg.uses_margin:
        margins = class_margins(cfg, hist)
        if margins.size != n_classes:
            raise ValueError(f"histogram has {margins.size} classes, logits have {n_classes}")
        zs = z.copy()
        zs[rows, y] -= margins[y]
    else:
        zs = z

    p, p_y, rest, log_p_y = _softmax_parts(zs, y)
    ce = -np.maximum(log_p_y, LOG_PROB_FLOOR)
    onehot = np.zeros_like(p)
    onehot[rows, y] = 1.0
    d_ce = p - onehot

    if not cfg.uses_focus:
        return ce, d_ce

    if cfg.family == "cri" and not cfg.shifted_focus:
        pf_vec, pf, rest_f, _ = _softmax_parts(z, y)
    else:
        pf_vec, pf, rest_f = p, p_y, rest

    gamma = cfg.gamma
    modulator = rest_f**gamma
    # d(1-pf)^gamma / d pf, zero wherever (1 - pf) vanishes.
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(rest_f > 0, gamma * rest_f ** (gamma - 1.0), 0.0)
    d_pf = pf[:, None] * (onehot - pf_vec)
    values = modulator * ce
    grads = modulator[:, None] * d_ce - (ce * slope)[:, None] * d_pf

    if cfg.family == "cri" and cfg.sigma != "none" and cfg.t_threshold > 0:
        t = cfg.t_threshold
        below = pf < t
        if np.any(below):
            cap = sigma_cap(cfg)
            if cfg.sigma == "zero":
                values = np.where(below, 0.0, values)
                grads = np.where(below[:, None], 0.0, grads)
            elif cfg.sigma == "constant":
                values = np.where(below, cap, values)
                grads = np.where(below[:, None], 0.0, grads)
            else:
                values = np.where(below, pf / t * cap, values)
                grads = np.where(below[:, None], (cap / t) * d_pf, grads)
    return values, grads


def loss_forward(cfg, hist, logits, y):
    """Loss of a single example with logits ``logits`` and label ``y``."""
    z = np.asarray(logits, dtype=np.float64)
    check_class_index(y, z.size)
    values, _ = loss_terms(cfg, hist, z[None, :], np.array([y]))
    return float(values[0])


def loss_grad(cfg, hist, logits, y):
    z = np.asarray(logits, dtype=np.float64)
    check_class_index(y, z.size)
    values, grads = loss_terms(cfg, hist, z[None, :], np.array([y]))
    return LossOutput(float(values[0]), grads[0])
