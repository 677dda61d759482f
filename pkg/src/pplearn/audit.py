"""Finite-difference audit of the analytic loss gradients."""

from dataclasses import dataclass, replace

import numpy as np

from .losses import class_margins, loss_terms, softmax_prob

__all__ = ["AuditResult", "audit_loss", "audit_all", "central_difference", "focus_prob"]

FD_STEP = 1e-5
ATOL = 1e-6
RTOL = 1e-4


@dataclass(frozen=True)
class AuditResult:
    label: str
    cases: int
    skipped: int
    worst_ratio: float
    worst_abs: float

    @property
    def passed(self):
        return self.worst_ratio <= 1.0


def central_difference(fn, z, h=FD_STEP):
    z = np.asarray(z, dtype=np.float64)
    grad = np.empty_like(z)
    for j in range(z.size):
        step = np.zeros_like(z)
        step[j] = h
        grad[j] = (fn(z + step) - fn(z - step)) / (2 * h)
    return grad


def focus_prob(cfg, counts, z, y):
    """Probability the CRI threshold test looks at."""
    margin = class_margins(cfg, counts)[y] if cfg.uses_margin and cfg.shifted_focus else 0.0
    return softmax_prob(z, y, margin)


def audit_loss(cfg, n_cases=1000, seed=0, corrupt=False, label=None):
    """Compare analytic and central-difference gradients on random inputs.

    The score of a case is ``max_j |g - g_fd| / (ATOL + RTOL * |g_fd|)``;
    the audit passes when the worst score is at most 1. Cases within 1e-3
    of the CRI threshold are skipped.
    """
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    worst_abs = 0.0
    skipped = 0
    for _ in range(n_cases):
        C = int(rng.integers(2, 11))
        counts = rng.integers(1, 1001, size=C)
        z = rng.normal(0.0, 3.0, size=C)
        y = int(rng.integers(C))
        if cfg.family == "cri" and abs(focus_prob(cfg, counts, z, y) - cfg.t_threshold) < 1e-3:
            skipped += 1
            continue

        def fn(v):
            return float(loss_terms(cfg, counts, v[None, :], np.array([y]))[0][0])

        analytic = loss_terms(cfg, counts, z[None, :], np.array([y]))[1][0]
        if corrupt:
            analytic = analytic * 1.01 + 1e-3
        numeric = central_difference(fn, z)
        err = np.abs(analytic - numeric)
        worst_abs = max(worst_abs, float(err.max()))
        worst_ratio = max(worst_ratio, float(np.max(err / (ATOL + RTOL * np.abs(numeric)))))
    return AuditResult(label or cfg.family, n_cases, skipped, worst_ratio, worst_abs)


def audit_all(base, n_cases=1000, seed=0, corrupt=False):
    """Audit every loss family and, for CRI, every correction variant."""
    results = []
    for family in ("ce", "focal", "ldam"):
        results.append(audit_loss(replace(base, family=family), n_cases, seed, corrupt))
    for sigma in ("none", "zero", "constant", "linear"):
        cfg = replace(base, family="cri", sigma=sigma)
        results.append(audit_loss(cfg, n_cases, seed, corrupt, label=f"cri/{sigma}"))
    return results

