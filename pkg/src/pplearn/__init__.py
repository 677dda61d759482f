"""Phased progressive re-balancing and the coupling-regulation-imbalance loss
for imbalanced classification."""

__version__ = "0.1.0"

from .datagen import Dataset, ImbalanceProfile, apply_qr, load_tabular, profile_counts, synth_gaussians
from .estimator import PPLClassifier
from .histogram import ClassHistogram
from .losses import LossConfig, class_weight, ldam_margin, loss_forward, loss_grad, softmax_prob
from .metrics import RunRecord, hmt_split
from .mixer import MixConfig, label_lambda, mix_pair
from .model import ModelParams, evaluate, forward_backward
from .sampler import class_probs, draw_epoch, pps_probs_at
from .schedules import PhaseSchedule, TransformKind, alpha_at, mix_bounds_at, q_at, transform
from .trainer import DivergenceError, TrainConfig, apply_method, run_baseline_suite, train

__all__ = [
    "ClassHistogram",
    "Dataset",
    "DivergenceError",
    "ImbalanceProfile",
    "LossConfig",
    "MixConfig",
    "ModelParams",
    "PPLClassifier",
    "PhaseSchedule",
    "RunRecord",
    "TrainConfig",
    "TransformKind",
    "alpha_at",
    "apply_method",
    "apply_qr",
    "class_probs",
    "class_weight",
    "draw_epoch",
    "evaluate",
    "forward_backward",
    "hmt_split",
    "label_lambda",
    "ldam_margin",
    "load_tabular",
    "loss_forward",
    "loss_grad",
    "mix_bounds_at",
    "mix_pair",
    "pps_probs_at",
    "profile_counts",
    "q_at",
    "run_baseline_suite",
    "softmax_prob",
    "synth_gaussians",
    "train",
    "transform",
]
