"""Scikit-learn style front end for the multi-dataset network trainer.

ScalarizedNetClassifier is a drop-in estimator (get_params/set_params,
fit/predict/score) around init_network + sgd_train. The multi-dataset
weighting enters through the optional ``groups`` argument of fit: rows
sharing a group value form one dataset, and the group losses are
combined with perturbed-uniform weights controlled by ``epsilon`` (or
with explicitly supplied ``betas``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .losses import ScalarizationWeights, epsilon_weights
from .network import TrainConfig, forward, init_network, sgd_train
from .validation import as_float_matrix, new_rng

DEFAULT_HIDDEN = {"mlp": (25,), "residual": (64, 64)}
DEFAULT_LEARNING_RATE = {"mlp": 0.1, "residual": 0.05}


class _GroupView:
    """Lightweight dataset view over rows of (X, T)."""

    def __init__(self, inputs, targets, name):
        self.inputs = inputs
        self.targets = targets
        self.name = name


class ScalarizedNetClassifier(ClassifierMixin, BaseEstimator):
    """Dense-network classifier trained with a weighted multi-group loss.

    Parameters
    ----------
    architecture : "mlp" or "residual"
    hidden : tuple of hidden-layer widths, or None for the architecture
        default ((25,) for the perceptron, (64, 64) for the residual net)
    metric : per-sample loss kind, default "binary-cross-entropy"
    epsilon : perturbation of the uniform group weights; the first group
        gets 1/M + epsilon, the rest 1/M - epsilon/(M-1)
    betas : explicit group weights overriding epsilon (must sum to 1)
    epochs, batch_size : SGD schedule (batch_size counts rows per group)
    learning_rate : step size, or None for the architecture default
    seed : drives both the weight initialization and the shuffling
    param_box : optional bound B; parameters are projected onto [-B, B]
        after every update

    Attributes set by fit: classes_, network_, history_, betas_,
    n_features_in_.
    """

    def __init__(self, architecture="mlp", hidden=None, metric="binary-cross-entropy",
                 epsilon=0.0, betas=None, epochs=30, batch_size=32, learning_rate=None,
                 seed=0, param_box=None):
        self.architecture = architecture
        self.hidden = hidden
        self.metric = metric
        self.epsilon = epsilon
        self.betas = betas
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.param_box = param_box

    def _resolved_dims(self, n_features, n_classes):
        hidden = DEFAULT_HIDDEN[self.architecture] if self.hidden is None else tuple(self.hidden)
        return (n_features, *hidden, n_classes)

    def fit(self, X, y, groups=None):
        X = as_float_matrix(X, "X")
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be 1-D with one label per row of X")
        self.classes_, encoded = np.unique(y, return_inverse=True)
        targets = np.zeros((X.shape[0], self.classes_.size))
        targets[np.arange(X.shape[0]), encoded] = 1.0

        if groups is None:
            datasets = [_GroupView(X, targets, "all")]
        else:
            groups = np.asarray(groups)
            if groups.shape[0] != X.shape[0]:
                raise ValueError("groups must have one entry per row of X")
            keys = np.unique(groups)
            datasets = [
                _GroupView(X[groups == key], targets[groups == key], str(key)) for key in keys
            ]

        if self.betas is not None:
            betas = np.asarray(self.betas, dtype=float)
            if betas.size != len(datasets):
                raise ValueError(f"betas has length {betas.size} but there are {len(datasets)} groups")
            weights = ScalarizationWeights(betas)
        else:
            weights = epsilon_weights(len(datasets), self.epsilon)
        self.betas_ = weights.betas

        init_seed, shuffle_seed = np.random.SeedSequence(self.seed).generate_state(2, np.uint64)
        dims = self._resolved_dims(X.shape[1], self.classes_.size)
        net = init_network(self.architecture, dims, seed=int(init_seed))
        lr = DEFAULT_LEARNING_RATE[self.architecture] if self.learning_rate is None else self.learning_rate
        config = TrainConfig(
            datasets=datasets, metric=self.metric, weights=weights,
            epochs=self.epochs, batch_size=self.batch_size, learning_rate=lr,
            seed=int(shuffle_seed), param_box=self.param_box,
        )
        self.network_, self.history_ = sgd_train(net, config)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        self._check_fitted()
        X = as_float_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return forward(self.network_, X)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise RuntimeError("this classifier has not been fitted yet")


class GaussianNoise(TransformerMixin, BaseEstimator):
    """Stateless augmentation transformer: add seeded zero-mean Gaussian
    noise to every entry and clamp back to [0, 1]."""

    def __init__(self, sigma=0.1, seed=0):
        self.sigma = sigma
        self.seed = seed

    def fit(self, X, y=None):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        return self

    def transform(self, X):
        X = as_float_matrix(X, "X")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.sigma == 0:
            return X.copy()
        noise = new_rng(self.seed).normal(0.0, self.sigma, size=X.shape)
        return np.clip(X + noise, 0.0, 1.0)
