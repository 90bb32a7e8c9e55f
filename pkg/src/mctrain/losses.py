"""Per-sample fitting losses, loss vectors, and scalarization weights.

The training objective of this package is a vector with one entry per
sample: entry i measures how far the model output for sample i is from
its label. Minimization of that vector is resolved by weighted-sum
scalarization, with one weight per dataset and uniform 1/s averaging
inside each dataset of size s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_float_matrix, as_float_vector, check_same_shape

METRIC_KINDS = ("squared-error", "logistic", "binary-cross-entropy")

# Predictions are clipped to [BCE_CLIP, 1 - BCE_CLIP] before the logs, so
# a prediction of exactly 0 or 1 is never an error.
BCE_CLIP = 1e-12


@dataclass(frozen=True)
class Metric:
    """One of the supported per-sample losses.

    kind:
      squared-error          sum_k (p_k - y_k)^2
      logistic               ln(1 + exp(-u)) with u = p . y, labels in {-1, +1}
      binary-cross-entropy   -sum_k [y_k ln p_k + (1 - y_k) ln(1 - p_k)]
    """

    kind: str

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}; expected one of {METRIC_KINDS}")

    def batch_loss(self, predictions, labels):
        """Per-row loss for row-aligned prediction and label matrices."""
        p = as_float_matrix(predictions, "predictions")
        y = as_float_matrix(labels, "labels")
        check_same_shape(p, y, "predictions", "labels")
        if self.kind == "squared-error":
            return ((p - y) ** 2).sum(axis=1)
        if self.kind == "logistic":
            u = (p * y).sum(axis=1)
            return np.logaddexp(0.0, -u)
        pc = np.clip(p, BCE_CLIP, 1.0 - BCE_CLIP)
        return -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)).sum(axis=1)

    def batch_distance(self, a, b):
        """Row-wise distance between two point sets.

        Defined only for squared-error, whose loss is the square of the
        Euclidean distance. The perturbation-bound checks need a true
        distance (triangle inequality), which the logistic and
        cross-entropy losses do not provide.
        """
        if self.kind != "squared-error":
            raise ValueError(
                f"metric {self.kind!r} has no underlying distance; "
                "perturbation bounds require the squared-error metric "
                "(verified on Euclidean distances, whose square is the loss)"
            )
        a = as_float_matrix(a, "a")
        b = as_float_matrix(b, "b")
        check_same_shape(a, b, "a", "b")
        return np.sqrt(((a - b) ** 2).sum(axis=1))

    def distance(self, a, b):
        """Distance between two single points (see batch_distance)."""
        a = as_float_vector(a, "a")
        b = as_float_vector(b, "b")
        return float(self.batch_distance(a.reshape(1, -1), b.reshape(1, -1))[0])


SQUARED_ERROR = Metric("squared-error")
LOGISTIC = Metric("logistic")
BINARY_CROSS_ENTROPY = Metric("binary-cross-entropy")


def as_metric(metric):
    """Accept a Metric or a kind string."""
    if isinstance(metric, Metric):
        return metric
    return Metric(str(metric))


def per_sample_loss(metric, prediction, label):
    """Loss of a single (prediction, label) pair."""
    metric = as_metric(metric)
    p = as_float_vector(prediction, "prediction")
    y = as_float_vector(label, "label")
    if p.shape != y.shape:
        raise ValueError(f"prediction has length {p.size} but label has length {y.size}")
    return float(metric.batch_loss(p.reshape(1, -1), y.reshape(1, -1))[0])


@dataclass(frozen=True)
class DfeVector:
    """Vector of per-sample losses for one dataset; entries are >= 0."""

    values: np.ndarray
    dataset_name: str = ""

    def __post_init__(self):
        values = as_float_vector(self.values, "values")
        if (values < 0).any():
            raise ValueError("loss vector has negative entries")
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self):
        return self.values.size

    def mean(self):
        return float(self.values.mean())


def dfe_vector(model_outputs, dataset, metric):
    """Per-sample loss vector of model outputs against a dataset's targets.

    The summation order inside each sample is fixed (left to right over
    output components), so results are bit-reproducible.
    """
    metric = as_metric(metric)
    outputs = as_float_matrix(model_outputs, "model_outputs")
    if outputs.shape[0] != dataset.targets.shape[0]:
        raise ValueError(
            f"model_outputs has {outputs.shape[0]} rows but dataset "
            f"{dataset.name!r} has {dataset.targets.shape[0]} samples"
        )
    return DfeVector(metric.batch_loss(outputs, dataset.targets), dataset.name)


@dataclass(frozen=True)
class ScalarizationWeights:
    """Per-dataset weights: nonnegative, summing to 1 within 1e-12."""

    betas: np.ndarray

    def __post_init__(self):
        betas = as_float_vector(self.betas, "betas")
        if (betas < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(betas.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {betas.sum()!r}")
        object.__setattr__(self, "betas", betas)

    def __len__(self):
        return self.betas.size


def as_beta_array(weights, expected_len=None, name="weights"):
    """Accept ScalarizationWeights or a raw nonnegative array.

    The raw-array path skips the sum-to-1 guard; it exists for rescaling
    analyses (weighted sums are linear in the weights).
    """
    betas = weights.betas if isinstance(weights, ScalarizationWeights) else as_float_vector(weights, name)
    if (betas < 0).any():
        raise ValueError(f"{name} must be nonnegative")
    if expected_len is not None and betas.size != expected_len:
        raise ValueError(f"{name} has length {betas.size}, expected {expected_len}")
    return betas


def scalarize(dfe_vectors, weights):
    """Weighted sum of the dataset means of per-sample loss vectors.

    Inside each dataset the entries are averaged uniformly; the weights
    act at dataset granularity.
    """
    betas = as_beta_array(weights, expected_len=len(dfe_vectors))
    return float(sum(b * vec.mean() for b, vec in zip(betas, dfe_vectors)))


def epsilon_weights(n_datasets=3, epsilon=0.0):
    """Perturbed uniform weights over n_datasets.

    The first dataset gets 1/M + epsilon, the others 1/M - epsilon/(M-1).
    epsilon = 0 recovers the uniform weighting. The last weight is set to
    1 minus the others so the float sum is exactly 1.0.
    """
    m = int(n_datasets)
    if m < 1:
        raise ValueError("n_datasets must be >= 1")
    epsilon = float(epsilon)
    if m == 1:
        if epsilon != 0.0:
            raise ValueError("a single dataset admits no perturbation; epsilon must be 0")
        return ScalarizationWeights(np.array([1.0]))
    betas = np.empty(m)
    betas[0] = 1.0 / m + epsilon
    betas[1:-1] = 1.0 / m - epsilon / (m - 1)
    betas[-1] = 1.0 - betas[:-1].sum()
    if (betas < 0).any():
        bad = int(np.flatnonzero(betas < 0)[0])
        raise ValueError(
            f"epsilon={epsilon!r} makes weight {bad + 1} of {m} negative "
            f"({betas[bad]!r}); all weights must stay nonnegative, and strictly "
            "positive weights are required for properly efficient minimizers"
        )
    return ScalarizationWeights(betas)
