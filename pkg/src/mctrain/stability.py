"""Perturbation bounds for the per-sample loss-distance vector.

Both checks compare the realized change of the vector of per-sample
distances against a closed-form bound:

  label side   ||D - D~||_2 <= sqrt(sum_i d(y_i, y~_i)^2)
  input side   ||D - D~||_2 <= K * sqrt(sum_i d(x_i, x~_i)^2)

where D_i = d(f(x_i), y_i) and K is a Lipschitz constant of the model.
The bounds rest on the triangle inequality, so they are verified with
the Euclidean distance (the squared-error loss is its square); metrics
without an underlying distance are rejected up front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import as_metric
from .network import forward
from .validation import as_float_matrix, check_same_shape, new_rng

# additive slack when flagging whether the inequality holds
HOLDS_SLACK = 1e-9


@dataclass(frozen=True)
class StabilityReport:
    """One realized-deviation-vs-bound comparison.

    detail holds the per-sample deviations |D_i - D~_i| whose Euclidean
    norm is lhs. For input-side checks, lipschitz_k records the constant
    used and k_estimated whether it came from sampling rather than from
    an analytic argument.
    """

    lhs: float
    rhs: float
    holds: bool
    detail: np.ndarray
    lipschitz_k: float | None = None
    k_estimated: bool = False

    def summary(self):
        verdict = "holds" if self.holds else "VIOLATED"
        extra = ""
        if self.lipschitz_k is not None:
            origin = "sampled" if self.k_estimated else "supplied"
            extra = f" (K={self.lipschitz_k:.6g}, {origin})"
        return f"deviation {self.lhs:.6g} <= bound {self.rhs:.6g}{extra}: {verdict}"


def label_stability_bound(labels, perturbed_labels, metric):
    """sqrt of the summed squared distances between old and new labels."""
    metric = as_metric(metric)
    y = as_float_matrix(labels, "labels")
    yt = as_float_matrix(perturbed_labels, "perturbed_labels")
    check_same_shape(y, yt, "labels", "perturbed_labels")
    return float(np.sqrt((metric.batch_distance(y, yt) ** 2).sum()))


def verify_label_stability(model_outputs, dataset, perturbed_labels, metric):
    """Compare the loss-vector deviation under a label perturbation with
    its bound. Model outputs stay fixed; only the labels move."""
    metric = as_metric(metric)
    outputs = as_float_matrix(model_outputs, "model_outputs")
    y = as_float_matrix(dataset.targets, "dataset targets")
    yt = as_float_matrix(perturbed_labels, "perturbed_labels")
    check_same_shape(y, yt, "targets", "perturbed_labels")
    if outputs.shape != y.shape:
        raise ValueError(f"model_outputs shape {outputs.shape} does not match targets {y.shape}")
    base = metric.batch_distance(outputs, y)
    moved = metric.batch_distance(outputs, yt)
    detail = np.abs(base - moved)
    lhs = float(np.sqrt((detail**2).sum()))
    rhs = label_stability_bound(y, yt, metric)
    return StabilityReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + HOLDS_SLACK), detail=detail)


def estimate_lipschitz(net, n_pairs=10_000, seed=0, low=0.0, high=1.0, local_scale=None):
    """Largest sampled difference quotient ||f(a) - f(b)|| / ||a - b||.

    Pairs are drawn uniformly from [low, high]^d; when local_scale is
    given, half of them are nearby pairs (b = a + Gaussian at that
    scale), which probes the quotients at perturbation-sized steps. The
    result is an empirical lower estimate, not a certified constant.
    """
    n_pairs = int(n_pairs)
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    rng = new_rng(seed)
    d = net.in_width
    a = rng.uniform(low, high, size=(n_pairs, d))
    b = rng.uniform(low, high, size=(n_pairs, d))
    if local_scale is not None:
        half = n_pairs // 2
        b[:half] = np.clip(a[:half] + rng.normal(0.0, local_scale, size=(half, d)), low, high)
    gaps = np.sqrt(((a - b) ** 2).sum(axis=1))
    keep = gaps > 0
    if not keep.any():
        raise ValueError("all sampled pairs coincide")
    out_gap = np.sqrt(((forward(net, a[keep]) - forward(net, b[keep])) ** 2).sum(axis=1))
    return float((out_gap / gaps[keep]).max())


def verify_input_stability(net, dataset, perturbed_inputs, metric, lipschitz_k="estimate",
                           n_pairs=10_000, seed=0, local_scale=None):
    """Compare the loss-vector deviation under an input perturbation with
    K times the input displacement norm.

    lipschitz_k may be a positive number (e.g. the weight norm of a
    linear model) or "estimate", in which case it is sampled via
    estimate_lipschitz and the report is flagged accordingly.
    """
    metric = as_metric(metric)
    x = as_float_matrix(dataset.inputs, "dataset inputs")
    xt = as_float_matrix(perturbed_inputs, "perturbed_inputs")
    check_same_shape(x, xt, "inputs", "perturbed_inputs")
    estimated = isinstance(lipschitz_k, str)
    if estimated:
        if lipschitz_k != "estimate":
            raise ValueError(f"lipschitz_k must be a number or 'estimate', got {lipschitz_k!r}")
        k = estimate_lipschitz(net, n_pairs=n_pairs, seed=seed, local_scale=local_scale)
    else:
        k = float(lipschitz_k)
        if k <= 0:
            raise ValueError("a supplied Lipschitz constant must be positive")
    y = dataset.targets
    base = metric.batch_distance(forward(net, x), y)
    moved = metric.batch_distance(forward(net, xt), y)
    detail = np.abs(base - moved)
    lhs = float(np.sqrt((detail**2).sum()))
    rhs = k * float(np.sqrt((((x - xt) ** 2).sum(axis=1)).sum()))
    return StabilityReport(
        lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + HOLDS_SLACK),
        detail=detail, lipschitz_k=k, k_estimated=estimated,
    )


def reports_to_csv(reports):
    """Serialize a batch of reports: trial id, lhs, rhs, holds."""
    lines = ["trial,lhs,rhs,holds"]
    for i, r in enumerate(reports):
        lines.append(f"{i},{r.lhs:.10g},{r.rhs:.10g},{str(r.holds).lower()}")
    return "\n".join(lines) + "\n"
