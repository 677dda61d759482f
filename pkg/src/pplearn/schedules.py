"""Phase-dependent schedules for progressive re-balancing.

Training is split into three phases by an epoch window ``[e0, e1]``:
plain training before ``e0``, a transition governed by a monotone
transformation ``f`` on ``[e0, e1]``, and fully re-balanced training after
``e1``. The same ``f`` drives the re-weighting exponent, the sampling
exponent and the mixup label bounds.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from ._validation import check_epoch, check_unit_interval

__all__ = [
    "TransformKind",
    "PhaseSchedule",
    "transform",
    "progress_at",
    "alpha_at",
    "q_at",
    "mix_bounds_at",
]

POWER = "power"
LOG = "log"
INVLOG = "invlog"
_VARIANTS = (POWER, LOG, INVLOG)


@dataclass(frozen=True)
class TransformKind:
    """Shape of the transition curve.

    ``power`` is ``t**rho`` (``rho=1`` is linear, ``rho>1`` convex,
    ``rho<1`` concave). ``log`` uses ``rho`` as a logarithm base; it is
    increasing for every ``rho > 0`` and ``rho=1`` is taken as its limit,
    the identity. ``invlog`` accepts any ``rho > 0`` and does not depend on it.
    """

    variant: str = POWER
    rho: float = 5.0

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown transform variant {self.variant!r}; expected one of {_VARIANTS}")
        if not math.isfinite(self.rho) or self.rho <= 0:
            raise ValueError(f"rho must be a positive real, got {self.rho}")


@dataclass(frozen=True)
class PhaseSchedule:
    e0: int = 100
    e1: int = 160
    delta: float = 1.0
    kind: TransformKind = TransformKind()

    def __post_init__(self):
        check_epoch(self.e0)
        check_epoch(self.e1)
        if self.e0 > self.e1:
            raise ValueError(f"e0 must not exceed e1, got e0={self.e0}, e1={self.e1}")
        if not math.isfinite(self.delta) or self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")


def transform(kind, t):
    """Evaluate the transition curve at progress ``t`` in ``[0, 1]``.

    The endpoints are returned exactly: ``f(0) == 0`` and ``f(1) == 1``.

    >>> transform(TransformKind("power", 2.0), 0.5)
    0.25
    """
    t = check_unit_interval(t, "t")
    if t == 0.0:
        return 0.0
    if t == 1.0:
        return 1.0
    rho = kind.rho
    if kind.variant == POWER:
        return t**rho
    if kind.variant == LOG:
        if rho == 1.0:
            return t
        return math.log1p((rho - 1.0) * t) / math.log(rho)
    # rho ** (t * log_rho 2) - 1 simplifies to 2**t - 1 for every base.
    return math.expm1(t * math.log(2.0))


def progress_at(schedule, epoch):
    """Transition value ``f(E)``: 0 before the window, 1 after it.

    A degenerate window ``e0 == e1`` gives a step at ``e1``.
    """
    e = check_epoch(epoch)
    if e < schedule.e0:
        return 0.0
    if e >= schedule.e1:
        return 1.0
    t = Fraction(e - schedule.e0, schedule.e1 - schedule.e0)
    return transform(schedule.kind, float(t))


def alpha_at(schedule, epoch):
    """Re-weighting exponent: 0, then ``delta * f(E)``, then ``delta``."""
    e = check_epoch(epoch)
    if e < schedule.e0:
        return 0.0
    if e > schedule.e1:
        return float(schedule.delta)
    return schedule.delta * progress_at(schedule, e)


def q_at(schedule, epoch):
    """Sampling exponent, moving from 1 (instance-frequency) to ``1 - delta``."""
    if schedule.delta > 1:
        raise ValueError(f"sampling needs delta <= 1, got {schedule.delta}")
    return 1.0 - alpha_at(schedule, epoch)


def mix_bounds_at(schedule, epoch, lambda_x):
    """Label mixing bounds ``(lambda0, lambda1)`` for a given image factor.

    Both start at ``lambda_x`` and relax towards ``(0, 1)``; ``delta`` does
    not enter.
    """
    lam = check_unit_interval(lambda_x, "lambda_x")
    f = progress_at(schedule, epoch)
    lambda0 = lam * (1.0 - f)
    return lambda0, lambda0 + f
