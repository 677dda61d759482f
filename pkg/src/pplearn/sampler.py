"""Class-aware re-sampling with probabilities ``p_j = n_j**q / sum_i n_i**q``.

``q = 1`` reproduces instance-uniform sampling, ``q = 0`` draws every class
with equal probability. Scheduling ``q`` over epochs yields the deferred,
progressively-balanced and phased progressive variants.
"""

import numpy as np

from ._validation import check_random_state, check_unit_interval
from .histogram import as_counts
from .schedules import PhaseSchedule, q_at

__all__ = [
    "SAMPLER_MODES",
    "class_probs",
    "draw_epoch",
    "pps_probs_at",
    "sampler_schedule",
    "ClassAwareSampler",
]

SAMPLER_MODES = ("none", "rs", "drs", "crt_rs", "pb", "pps")


def class_probs(hist, q):
    counts = as_counts(hist).astype(np.float64)
    q = check_unit_interval(q, "q")
    if q == 0.0:
        return np.full(counts.size, 1.0 / counts.size)
    mass = counts if q == 1.0 else counts**q
    return mass / mass.sum()


def draw_epoch(hist, q, epoch_size, rng_seed=None):
    """Two-stage draw with replacement: a class by ``class_probs``, then a
    member uniformly within it.

    Returns ``(classes, within)`` integer arrays of length ``epoch_size``.
    """
    if epoch_size < 1:
        raise ValueError(f"epoch_size must be >= 1, got {epoch_size}")
    counts = as_counts(hist)
    rng = check_random_state(rng_seed)
    probs = class_probs(counts, q)
    classes = rng.choice(counts.size, size=int(epoch_size), p=probs)
    within = rng.integers(0, counts[classes])
    return classes, within


def pps_probs_at(hist, schedule, epoch):
    return class_probs(hist, q_at(schedule, epoch))


def sampler_schedule(mode, phase, delta, epochs, milestone):
    """Window used by a sampler mode; ``None`` means plain shuffling.

    ``rs`` re-samples from the first epoch, ``drs``/``crt_rs`` switch at
    ``milestone``, ``pb`` spreads the transition over the whole run and
    ``pps`` uses the shared phase window.
    """
    if mode not in SAMPLER_MODES:
        raise ValueError(f"unknown sampler mode {mode!r}; expected one of {SAMPLER_MODES}")
    if mode == "none":
        return None
    if mode == "rs":
        return PhaseSchedule(0, 0, delta, phase.kind)
    if mode in ("drs", "crt_rs"):
        return PhaseSchedule(milestone, milestone, delta, phase.kind)
    if mode == "pb":
        return PhaseSchedule(0, epochs, delta, phase.kind)
    return PhaseSchedule(phase.e0, phase.e1, delta, phase.kind)


class ClassAwareSampler:
    """Draws dataset row indices for one epoch according to ``q``.

    Owns no RNG; callers pass the run's generator so one stream serves a
    whole training run.
    """

    def __init__(self, labels, num_classes):
        labels = np.asarray(labels, dtype=np.int64)
        self.counts = np.bincount(labels, minlength=num_classes)
        order = np.argsort(labels, kind="stable")
        self._members = np.split(order, np.cumsum(self.counts)[:-1])

    def sample(self, q, epoch_size, rng):
        classes, within = draw_epoch(self.counts, q, epoch_size, rng)
        starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]])
        flat = np.concatenate(self._members)
        return flat[starts[classes] + within]
