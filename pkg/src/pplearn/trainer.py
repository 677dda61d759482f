"""Deterministic mini-batch SGD with phased re-weighting, re-sampling and mixup.

Each epoch computes a class re-weighting exponent ``alpha`` and a sampling
exponent ``q`` from their schedules. With re-normalization on, a batch
update is

    params -= lr * sum_i (w_i / sum_B w) * grad loss_i

so uniform weights reduce to plain mini-batch SGD and rescaling every class
weight by a constant leaves the update unchanged.

Method names such as ``"cri+ppw+ppmix"`` are resolved by
:func:`apply_method`; each ``+``-separated token sets one of the weighting,
sampling, mixing or loss modes and the remaining modes reset to plain.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .losses import LossConfig, class_weights
from .metrics import RunRecord, EpochRow, aggregate, bucket_accuracy, hmt_split, hmt_thresholds
from .mixer import MixConfig, mix_batch
from .model import evaluate, forward_backward, init_params
from .sampler import SAMPLER_MODES, ClassAwareSampler, sampler_schedule
from .schedules import PhaseSchedule, TransformKind, alpha_at, q_at

__all__ = [
    "WEIGHT_MODES",
    "DivergenceError",
    "TrainConfig",
    "train",
    "apply_method",
    "run_baseline_suite",
    "learning_rate_at",
]

log = logging.getLogger(__name__)

WEIGHT_MODES = ("none", "rw", "drw", "crt_rw", "ppw")

_WEIGHT_TOKENS = {"rw", "drw", "crt_rw", "ppw"}
_SAMPLER_TOKENS = {"rs", "drs", "crt_rs", "pb", "pps"}
_MIX_TOKENS = {"mixup", "remix", "ppmix"}
_LOSS_TOKENS = {"ce", "focal", "ldam", "cri"}


class DivergenceError(FloatingPointError):
    def __init__(self, epoch, reason="non-finite loss"):
        super().__init__(f"training diverged at epoch {epoch}: {reason}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 128
    lr: float = 0.1
    milestones: tuple = (160, 180)
    lr_decay: float = 0.1
    model: str = "linear"
    hidden: int = 64
    phase: PhaseSchedule = PhaseSchedule(100, 160, 1.0, TransformKind("power", 5.0))
    weight_mode: str = "none"
    loss: LossConfig = LossConfig("ce")
    sampler_mode: str = "none"
    sampler_delta: float = 1.0
    mix: MixConfig = MixConfig("none")
    renormalize: bool = True
    anneal_rho: float | None = None
    freeze_at: int | None = None
    head_frac: float = 0.24
    tail_frac: float = 0.04
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "milestones", tuple(int(m) for m in self.milestones))
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ValueError(f"learning rate must be > 0, got {self.lr}")
        ms = self.milestones
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError(f"milestones must be strictly increasing, got {ms}")
        if ms and (ms[0] < 0 or ms[-1] >= self.epochs):
            raise ValueError(f"milestones must lie in [0, {self.epochs}), got {ms}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"unknown weight mode {self.weight_mode!r}; expected one of {WEIGHT_MODES}")
        if self.sampler_mode not in SAMPLER_MODES:
            raise ValueError(f"unknown sampler mode {self.sampler_mode!r}; expected one of {SAMPLER_MODES}")
        if not (0 < self.sampler_delta <= 1):
            raise ValueError(f"sampler delta must lie in (0, 1], got {self.sampler_delta}")
        if self.anneal_rho is not None and self.anneal_rho <= 0:
            raise ValueError(f"anneal_rho must be > 0, got {self.anneal_rho}")

    @property
    def switch_epoch(self):
        """Epoch at which deferred methods switch: the first LR milestone."""
        return self.milestones[0] if self.milestones else self.phase.e1

    def weight_schedule(self):
        mode = self.weight_mode
        if mode == "none":
            return None
        if mode == "rw":
            return replace(self.phase, e0=0, e1=0)
        if mode in ("drw", "crt_rw"):
            return replace(self.phase, e0=self.switch_epoch, e1=self.switch_epoch)
        return self.phase

    def sample_schedule(self):
        return sampler_schedule(
            self.sampler_mode, self.phase, self.sampler_delta, self.epochs, self.switch_epoch
        )

    def freeze_epoch(self):
        if self.freeze_at is not None:
            return self.freeze_at
        if self.weight_mode == "crt_rw" or self.sampler_mode == "crt_rs":
            return self.switch_epoch
        return None


def apply_method(config, method):
    """Return ``config`` with its modes set from a method name like ``"cri+ppw"``."""
    changes = dict(weight_mode="none", sampler_mode="none", mix=replace(config.mix, mode="none"))
    family = "ce"
    for token in (t.strip().lower() for t in method.split("+")):
        if token in _WEIGHT_TOKENS:
            changes["weight_mode"] = token
        elif token in _SAMPLER_TOKENS:
            changes["sampler_mode"] = token
        elif token in _MIX_TOKENS:
            changes["mix"] = replace(config.mix, mode=token)
        elif token in _LOSS_TOKENS:
            family = token
        else:
            raise ValueError(f"unknown method token {token!r} in {method!r}")
    changes["loss"] = replace(config.loss, family=family)
    return replace(config, **changes)


def learning_rate_at(config, epoch):
    decays = sum(1 for m in config.milestones if epoch >= m)
    lr = config.lr * config.lr_decay**decays
    if config.anneal_rho is not None:
        sched = config.weight_schedule() or config.phase
        steps = min(max(epoch - sched.e0, 0), sched.e1 - sched.e0 + 1)
        lr /= config.anneal_rho**steps
    return lr


def _streams(seed):
    init, sample, mix = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(init), np.random.default_rng(sample), np.random.default_rng(mix)


def train(config, data, validation=None, callback=None):
    """Train a model on ``data`` and return ``(params, record)``.

    ``validation`` defaults to the training set. ``callback(epoch, params)``
    runs after every epoch.
    """
    counts = data.class_counts
    if np.any(counts < 1):
        raise ValueError(f"every class needs at least one training example, got {counts.tolist()}")
    validation = data if validation is None else validation
    rng_init, rng_sample, rng_mix = _streams(config.seed)
    params = init_params(data.n_features, data.num_classes, config.model, config.hidden, rng_init)

    X, y = data.features, data.labels
    n = data.n_samples
    wsched = config.weight_schedule()
    ssched = config.sample_schedule()
    sampler = ClassAwareSampler(y, data.num_classes) if ssched is not None else None
    mixing = config.mix.mode != "none"
    freeze_at = config.freeze_epoch()
    head_min, tail_max = hmt_thresholds(counts.max(), config.head_frac, config.tail_frac)
    buckets = hmt_split(counts, head_min, tail_max)
    record = RunRecord(data.num_classes)

    for epoch in range(config.epochs):
        lr = learning_rate_at(config, epoch)
        alpha = alpha_at(wsched, epoch) if wsched is not None else 0.0
        w_class = class_weights(counts, alpha)
        if sampler is None:
            q = 1.0
            order = rng_sample.permutation(n)
        else:
            q = q_at(ssched, epoch)
            order = sampler.sample(q, n, rng_sample)
        frozen = freeze_at is not None and epoch >= freeze_at
        loss_sum = 0.0
        weight_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            Xb, yb = X[idx], y[idx]
            if mixing:
                Xb, y2, lam = mix_batch(config.mix, config.phase, epoch, Xb, yb, counts, rng_mix)
                targets = np.stack([yb, y2], axis=1)
                weights = np.stack([lam, 1.0 - lam], axis=1) * w_class[targets]
            else:
                targets = yb
                weights = w_class[yb]
            try:
                total, grads = forward_backward(params, Xb, targets, weights, config.loss, counts)
            except FloatingPointError:
                raise DivergenceError(epoch) from None
            batch_weight = float(weights.sum())
            scale = lr / batch_weight if config.renormalize else lr / idx.size
            for i, ((W, b), (dW, db)) in enumerate(zip(params.layers, grads)):
                if frozen and i < len(params.layers) - 1:
                    continue
                W -= scale * dW
                b -= scale * db
            loss_sum += total
            weight_sum += batch_weight
        if not params.is_finite():
            raise DivergenceError(epoch, "non-finite parameters")

        result = evaluate(params, validation)
        acc = bucket_accuracy(result.per_class, buckets)
        record.append(
            EpochRow(
                epoch=epoch,
                lr=lr,
                alpha=alpha,
                q=q,
                train_loss=loss_sum / weight_sum,
                val_acc=result.overall,
                head_acc=acc["head"],
                medium_acc=acc["medium"],
                tail_acc=acc["tail"],
                per_class=[float(v) for v in result.per_class],
            )
        )
        if callback is not None:
            callback(epoch, params)
    return params, record


@dataclass
class SuiteResult:
    method: str
    seeds: list
    records: list = field(default_factory=list)
    error: str | None = None

    def metric(self, name):
        return [r.summary()[name] for r in self.records]

    def row(self):
        row = {"method": self.method, "n_seeds": len(self.records), "error": self.error or ""}
        for name in ("final_acc", "final_head_acc", "final_medium_acc", "final_tail_acc"):
            mean, std = aggregate(self.metric(name)) if self.records else (math.nan, math.nan)
            row[f"{name}_mean"] = mean
            row[f"{name}_std"] = std
        return row


def _run_cell(args):
    config, data = args
    train_ds, val_ds = data
    _, record = train(config, train_ds, val_ds)
    return record


def run_baseline_suite(base, data, methods, seeds=(0,), jobs=1):
    """Train every method for every seed and aggregate final accuracies.

    ``data`` is a ``(train, validation)`` pair shared by all runs, or a
    callable ``seed -> (train, validation)``. A failing method is reported
    in its row rather than aborting the suite.
    """
    results = []
    for method in methods:
        configs = [replace(apply_method(base, method), seed=s) for s in seeds]
        cells = [(cfg, data(cfg.seed) if callable(data) else data) for cfg in configs]
        res = SuiteResult(method, list(seeds))
        try:
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    res.records = list(pool.map(_run_cell, cells))
            else:
                res.records = [_run_cell(c) for c in cells]
        except (DivergenceError, ValueError) as exc:
            log.warning("method %s failed: %s", method, exc)
            res.error = str(exc)
        results.append(res)
    return results
