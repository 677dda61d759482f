"""Linear softmax and one-hidden-layer classifiers with manual backprop.

The hidden layer plays the role of the representation and the final affine
layer the classifier, so freezing ``layers[:-1]`` retrains only the
classifier.
"""

from dataclasses import dataclass

import numpy as np

from .losses import loss_terms
from .metrics import evaluate_predictions

__all__ = ["ModelParams", "init_params", "forward", "forward_backward", "evaluate", "predict_scores"]

ARCHITECTURES = ("linear", "mlp")


@dataclass
class ModelParams:
    layers: list
    architecture: str = "linear"

    def copy(self):
        return ModelParams([(W.copy(), b.copy()) for W, b in self.layers], self.architecture)

    @property
    def n_features(self):
        return self.layers[0][0].shape[0]

    @property
    def n_classes(self):
        return self.layers[-1][0].shape[1]

    def is_finite(self):
        return all(np.all(np.isfinite(W)) and np.all(np.isfinite(b)) for W, b in self.layers)

    def to_arrays(self):
        out = {"architecture": np.array(self.architecture)}
        for i, (W, b) in enumerate(self.layers):
            out[f"W{i}"] = W
            out[f"b{i}"] = b
        return out

    @classmethod
    def from_arrays(cls, arrays):
        n = sum(1 for k in arrays if k.startswith("W"))
        layers = [(np.array(arrays[f"W{i}"]), np.array(arrays[f"b{i}"])) for i in range(n)]
        return cls(layers, str(arrays["architecture"]))


def init_params(n_features, n_classes, architecture="linear", hidden=64, rng=None):
    """Uniform ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))`` weights and biases."""
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")
    rng = np.random.default_rng(rng)
    sizes = [n_features, n_classes] if architecture == "linear" else [n_features, hidden, n_classes]
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        b = rng.uniform(-bound, bound, size=fan_out)
        layers.append((W, b))
    return ModelParams(layers, architecture)


def forward(params, X):
    """Return ``(logits, activations)`` where ``activations[i]`` is the input
    to layer ``i``."""
    acts = [X]
    h = X
    last = len(params.layers) - 1
    for i, (W, b) in enumerate(params.layers):
        h = h @ W + b
        if i < last:
            h = np.tanh(h)
            acts.append(h)
    return h, acts


def predict_scores(params, X):
    return forward(params, np.asarray(X, dtype=np.float64))[0]


def forward_backward(params, X, targets, weights, loss_cfg, hist):
    """Weighted batch loss ``sum_{i,k} weights[i,k] * loss(z_i, targets[i,k])``
    and its gradient for every layer.

    ``targets``/``weights`` are ``(B,)`` for hard labels or ``(B, K)`` when
    each row carries several label terms (mixup uses ``K = 2``).
    """
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
        weights = weights.reshape(-1, 1)
    if targets.shape != weights.shape or targets.shape[0] != X.shape[0]:
        raise ValueError(f"targets {targets.shape}, weights {weights.shape} and {X.shape[0]} rows disagree")

    with np.errstate(over="ignore", invalid="ignore"):
        logits, acts = forward(params, X)
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("non-finite logits")
    total = 0.0
    d_out = np.zeros_like(logits)
    for k in range(targets.shape[1]):
        values, grads = loss_terms(loss_cfg, hist, logits, targets[:, k])
        w = weights[:, k]
        total += float(w @ values)
        d_out += w[:, None] * grads
    if not np.isfinite(total):
        raise FloatingPointError("non-finite batch loss")

    layer_grads = [None] * len(params.layers)
    delta = d_out
    for i in range(len(params.layers) - 1, -1, -1):
        W, _ = params.layers[i]
        layer_grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * (1.0 - acts[i] ** 2)
    return total, layer_grads


def evaluate(params, validation):
    """Accuracy of ``params`` on a dataset, see :func:`metrics.evaluate_predictions`."""
    if validation.n_features != params.n_features:
        raise ValueError(
            f"model expects {params.n_features} features, dataset has {validation.n_features}"
        )
    if validation.num_classes != params.n_classes:
        raise ValueError(f"model has {params.n_classes} outputs, dataset {validation.num_classes} classes")
    scores = predict_scores(params, validation.features)
    return evaluate_predictions(validation.labels, scores, validation.num_classes)
