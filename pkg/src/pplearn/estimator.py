"""scikit-learn compatible classifier around :func:`pplearn.trainer.train`."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .datagen import Dataset
from .losses import LossConfig
from .mixer import MixConfig
from .model import predict_scores
from .schedules import PhaseSchedule, TransformKind
from .trainer import TrainConfig, apply_method, train

__all__ = ["PPLClassifier"]


class PPLClassifier(ClassifierMixin, BaseEstimator):
    """Softmax classifier trained with phased progressive re-balancing.

    Every hyperparameter is a flat constructor argument so the estimator
    works with ``clone``, ``GridSearchCV`` and pipelines. ``method``, when
    given, overrides the four mode arguments (``weight_mode``,
    ``sampler_mode``, ``mix_mode``, ``loss``) with a preset such as
    ``"cri+ppw"``.

    Attributes
    ----------
    classes_ : ndarray
        Class labels seen during ``fit``; internal class ``i`` is ``classes_[i]``.
    class_counts_ : ndarray
        Training examples per class.
    params_ : ModelParams
    record_ : RunRecord
        Per-epoch metrics, computed on ``validation`` if passed to ``fit``.

    Examples
    --------
    >>> from pplearn import PPLClassifier
    >>> clf = PPLClassifier(method="cri+ppw", epochs=20, e0=5, e1=15, milestones=(16, 18))
    >>> clf.fit(X, y).score(X_val, y_val)  # doctest: +SKIP
    """

    def __init__(
        self,
        method=None,
        weight_mode="ppw",
        sampler_mode="none",
        mix_mode="none",
        loss="cri",
        epochs=200,
        batch_size=128,
        lr=0.1,
        milestones=(160, 180),
        lr_decay=0.1,
        model="linear",
        hidden=64,
        e0=100,
        e1=160,
        delta=1.0,
        transform="power",
        rho=5.0,
        gamma=1.5,
        s=None,
        max_margin=0.5,
        t_threshold=1e-6,
        sigma="linear",
        sampler_delta=1.0,
        kappa=3.0,
        tau=0.5,
        mix_beta=1.0,
        freeze_at=None,
        renormalize=True,
        anneal_rho=None,
        random_state=0,
    ):
        self.method = method
        self.weight_mode = weight_mode
        self.sampler_mode = sampler_mode
        self.mix_mode = mix_mode
        self.loss = loss
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.milestones = milestones
        self.lr_decay = lr_decay
        self.model = model
        self.hidden = hidden
        self.e0 = e0
        self.e1 = e1
        self.delta = delta
        self.transform = transform
        self.rho = rho
        self.gamma = gamma
        self.s = s
        self.max_margin = max_margin
        self.t_threshold = t_threshold
        self.sigma = sigma
        self.sampler_delta = sampler_delta
        self.kappa = kappa
        self.tau = tau
        self.mix_beta = mix_beta
        self.freeze_at = freeze_at
        self.renormalize = renormalize
        self.anneal_rho = anneal_rho
        self.random_state = random_state

    def _train_config(self):
        seed = self.random_state
        if not isinstance(seed, (int, np.integer)):
            raise ValueError(f"random_state must be an int seed, got {seed!r}")
        cfg = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            milestones=tuple(self.milestones),
            lr_decay=self.lr_decay,
            model=self.model,
            hidden=self.hidden,
            phase=PhaseSchedule(self.e0, self.e1, self.delta, TransformKind(self.transform, self.rho)),
            weight_mode=self.weight_mode,
            loss=LossConfig(
                family=self.loss,
                gamma=self.gamma,
                s=self.s,
                max_margin=self.max_margin,
                t_threshold=self.t_threshold,
                sigma=self.sigma,
            ),
            sampler_mode=self.sampler_mode,
            sampler_delta=self.sampler_delta,
            mix=MixConfig(self.mix_mode, self.kappa, self.tau, self.mix_beta),
            renormalize=self.renormalize,
            anneal_rho=self.anneal_rho,
            freeze_at=self.freeze_at,
            seed=int(seed),
        )
        if self.method is not None:
            cfg = apply_method(cfg, self.method)
        return cfg

    def _encode(self, y):
        lookup = {c: i for i, c in enumerate(self.classes_)}
        try:
            return np.array([lookup[v] for v in y], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} was not seen during fit") from None

    def fit(self, X, y, validation=None):
        """Fit on ``(X, y)``; ``validation`` is an optional ``(X_val, y_val)``
        pair used only for the per-epoch record."""
        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise ValueError("need at least two classes to fit")
        self.n_features_in_ = X.shape[1]
        config = self._train_config()
        data = Dataset(X, encoded, self.classes_.size, "train")
        val = None
        if validation is not None:
            X_val, y_val = check_X_y(*validation, dtype=np.float64)
            val = Dataset(X_val, self._encode(y_val), self.classes_.size, "validation")
        self.class_counts_ = data.class_counts
        self.params_, self.record_ = train(config, data, val)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return predict_scores(self.params_, X)

    def predict_proba(self, X):
        z = self.decision_function(X)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
