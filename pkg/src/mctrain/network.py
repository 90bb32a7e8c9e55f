"""Dense feed-forward networks with an optional identity shortcut.

Two named architectures are provided: a sigmoid multilayer perceptron
and a residual variant whose first hidden layer's output is added to the
second hidden layer before its rectifier fires. Training is plain
seeded SGD on the weighted multi-dataset loss; gradients come from exact
backpropagation, including through the shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import BCE_CLIP, as_beta_array, as_metric
from .validation import as_float_matrix, new_rng

ACTIVATIONS = ("sigmoid", "relu", "identity")

CHECKPOINT_HEADER = "mctrain-net v1"


def _apply_activation(kind, z):
    if kind == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if kind == "relu":
        return np.maximum(z, 0.0)
    return z


def _activation_derivative(kind, post):
    """Derivative with respect to the pre-activation, from the post value."""
    if kind == "sigmoid":
        return post * (1.0 - post)
    if kind == "relu":
        return (post > 0).astype(np.float64)
    return np.ones_like(post)


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ValueError("weights must be 2-D and bias 1-D")
        if self.weights.shape[0] != self.bias.size:
            raise ValueError("bias length must match the output width")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("layer parameters must be finite")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def in_width(self):
        return self.weights.shape[1]

    @property
    def out_width(self):
        return self.weights.shape[0]


@dataclass
class Network:
    """Ordered dense layers, optionally with one identity shortcut.

    shortcut = (src, dst) adds the post-activation output of layer src to
    layer dst. By default the sum lands on dst's pre-activation, so dst's
    own activation fires after the addition; with
    shortcut_after_activation the identity is added to dst's activated
    output instead.
    """

    layers: list
    shortcut: tuple | None = None
    shortcut_after_activation: bool = False

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_width != nxt.in_width:
                raise ValueError(
                    f"layer widths do not chain: {prev.out_width} feeds {nxt.in_width}"
                )
        if self.shortcut is not None:
            src, dst = self.shortcut
            if not (0 <= src < dst < len(self.layers)):
                raise ValueError("shortcut must run forward between distinct layers")
            if self.layers[src].out_width != self.layers[dst].out_width:
                raise ValueError("shortcut endpoints must have equal widths")
            self.shortcut = (int(src), int(dst))

    @property
    def in_width(self):
        return self.layers[0].in_width

    @property
    def out_width(self):
        return self.layers[-1].out_width

    @property
    def n_parameters(self):
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def parameter_vector(self):
        """Flat copy of all parameters: per layer, row-major weights then bias."""
        return np.concatenate([np.concatenate([l.weights.ravel(), l.bias]) for l in self.layers])

    def set_parameter_vector(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != self.n_parameters:
            raise ValueError(f"expected {self.n_parameters} parameters, got {vec.size}")
        offset = 0
        for layer in self.layers:
            w = layer.weights.size
            layer.weights = vec[offset : offset + w].reshape(layer.weights.shape).copy()
            offset += w
            b = layer.bias.size
            layer.bias = vec[offset : offset + b].copy()
            offset += b

    def copy(self):
        return Network(
            layers=[DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers],
            shortcut=self.shortcut,
            shortcut_after_activation=self.shortcut_after_activation,
        )


def init_network(architecture, dims, seed):
    """Seeded network with uniform fan-based weights and zero biases.

    Weights are drawn from U[-r, r] with r = sqrt(6 / (fan_in + fan_out)),
    using the PCG64 stream of the given seed, layer by layer.

    mlp        sigmoid hidden layers and a sigmoid output, e.g. (400, 25, 10)
    residual   two rectifier hidden layers of equal width with the identity
               shortcut between them, sigmoid output, e.g. (400, 64, 64, 10)
    """
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise ValueError("layer sizes must be positive")
    if len(dims) < 2:
        raise ValueError("need at least an input and an output size")
    if architecture == "mlp":
        activations = ["sigmoid"] * (len(dims) - 1)
        shortcut = None
    elif architecture == "residual":
        if len(dims) != 4:
            raise ValueError("residual architecture takes dims (input, width, width, classes)")
        if dims[1] != dims[2]:
            raise ValueError("residual hidden widths must match for the identity shortcut")
        activations = ["relu", "relu", "sigmoid"]
        shortcut = (0, 1)
    else:
        raise ValueError(f"unknown architecture {architecture!r}")

    rng = new_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(dims, dims[1:], activations):
        r = math.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-r, r, size=(fan_out, fan_in))
        layers.append(DenseLayer(weights, np.zeros(fan_out), act))
    return Network(layers=layers, shortcut=shortcut)


def _forward_cached(net, inputs):
    x = as_float_matrix(inputs, "inputs")
    if x.shape[1] != net.in_width:
        raise ValueError(f"inputs have width {x.shape[1]}, network expects {net.in_width}")
    acts = [x]
    for idx, layer in enumerate(net.layers):
        z = acts[-1] @ layer.weights.T + layer.bias
        if net.shortcut is not None and net.shortcut[1] == idx and not net.shortcut_after_activation:
            z = z + acts[net.shortcut[0] + 1]
        a = _apply_activation(layer.activation, z)
        if net.shortcut is not None and net.shortcut[1] == idx and net.shortcut_after_activation:
            a = a + acts[net.shortcut[0] + 1]
        acts.append(a)
    return acts


def forward(net, inputs):
    """Row-wise network outputs for a batch of inputs."""
    return _forward_cached(net, inputs)[-1]


def _as_batch(batch):
    if hasattr(batch, "inputs") and hasattr(batch, "targets"):
        return batch.inputs, batch.targets
    x, y = batch
    return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)


def _output_gradient(metric, outputs, targets, rowscale):
    """d(total loss)/d(outputs) for loss = sum_rows rowscale * per_row_loss."""
    if metric.kind == "squared-error":
        grad = 2.0 * (outputs - targets)
    elif metric.kind == "logistic":
        u = (outputs * targets).sum(axis=1)
        sig = _apply_activation("sigmoid", u)
        grad = (sig - 1.0)[:, None] * targets
    else:
        clipped = np.clip(outputs, BCE_CLIP, 1.0 - BCE_CLIP)
        inside = (outputs > BCE_CLIP) & (outputs < 1.0 - BCE_CLIP)
        grad = np.where(inside, (clipped - targets) / (clipped * (1.0 - clipped)), 0.0)
    return grad * rowscale[:, None]


def loss_and_grad(net, batches, metric, weights):
    """Weighted multi-dataset loss and its exact parameter gradient.

    The loss is sum_i beta_i * mean over batch i of the per-sample loss.
    The gradient is laid out like parameter_vector(). Empty batches are
    skipped (their weight contributes nothing on that step).
    """
    metric = as_metric(metric)
    pairs = [_as_batch(b) for b in batches]
    betas = as_beta_array(weights, expected_len=len(pairs))
    kept = [(x, y, b) for (x, y), b in zip(pairs, betas) if x.shape[0] > 0]
    if not kept:
        raise ValueError("all batches are empty")
    x = np.vstack([p[0] for p in kept])
    y = np.vstack([p[1] for p in kept])
    rowscale = np.concatenate([np.full(px.shape[0], b / px.shape[0]) for px, _, b in kept])
    if y.shape != (x.shape[0], net.out_width):
        raise ValueError("targets do not match the network output width")

    acts = _forward_cached(net, x)
    loss = float(rowscale @ metric.batch_loss(acts[-1], y))

    n_layers = len(net.layers)
    d_acts = [None] * (n_layers + 1)
    d_acts[n_layers] = _output_gradient(metric, acts[-1], y, rowscale)
    grads = [None] * n_layers
    for idx in range(n_layers - 1, -1, -1):
        layer = net.layers[idx]
        da = d_acts[idx + 1]
        has_shortcut_here = net.shortcut is not None and net.shortcut[1] == idx
        if has_shortcut_here and net.shortcut_after_activation:
            # identity branch bypasses the activation
            src_slot = net.shortcut[0] + 1
            d_acts[src_slot] = da if d_acts[src_slot] is None else d_acts[src_slot] + da
            post = acts[idx + 1] - acts[src_slot]
            dz = da * _activation_derivative(layer.activation, post)
        else:
            dz = da * _activation_derivative(layer.activation, acts[idx + 1])
            if has_shortcut_here:
                src_slot = net.shortcut[0] + 1
                d_acts[src_slot] = dz if d_acts[src_slot] is None else d_acts[src_slot] + dz
        grads[idx] = (dz.T @ acts[idx], dz.sum(axis=0))
        prev = dz @ layer.weights
        d_acts[idx] = prev if d_acts[idx] is None else d_acts[idx] + prev

    flat = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
    return loss, flat


class TrainingError(RuntimeError):
    """Raised when training hits a non-finite loss or gradient.

    epoch/batch locate the failure; batch is None for full-dataset
    evaluations (epoch 0 is the pre-training evaluation).
    """

    def __init__(self, message, epoch, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainConfig:
    datasets: list
    metric: object
    weights: object
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 0
    param_box: float | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.param_box is not None and not self.param_box > 0:
            raise ValueError("param_box must be positive")


@dataclass
class TrainHistory:
    """Per-epoch loss curve plus per-dataset diagnostics."""

    loss: np.ndarray  # (epochs,) weighted loss after each epoch
    dataset_means: np.ndarray  # (epochs, M) mean per-sample loss per dataset
    final_accuracy: np.ndarray  # (M,)
    initial_loss: float
    dataset_names: tuple = ()

    def to_csv(self):
        names = self.dataset_names or tuple(f"dataset{i + 1}" for i in range(self.dataset_means.shape[1]))
        lines = ["epoch,loss," + ",".join(f"mean_dfe_{n}" for n in names)]
        for e in range(self.loss.size):
            cells = [str(e + 1), format(self.loss[e], ".10g")]
            cells += [format(v, ".10g") for v in self.dataset_means[e]]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _epoch_metrics(net, datasets, metric, weights, epoch):
    betas = as_beta_array(weights, expected_len=len(datasets))
    with np.errstate(over="ignore", invalid="ignore"):
        means = np.array([metric.batch_loss(forward(net, d.inputs), d.targets).mean() for d in datasets])
        loss = float(betas @ means)
    if not (np.isfinite(loss) and np.isfinite(means).all()):
        raise TrainingError(
            f"non-finite loss on full-dataset evaluation after epoch {epoch}", epoch=epoch
        )
    return loss, means


def sgd_train(net, config):
    """Seeded minibatch SGD on the weighted multi-dataset loss.

    Each epoch reshuffles every dataset with the config seed's PCG64
    stream and walks ceil(max_size / batch_size) steps; step k takes the
    k-th proportional slice of each dataset's permutation, so all
    datasets are consumed exactly once per epoch and each minibatch mixes
    them in proportion to their sizes. Returns a trained copy of the
    network together with the history; the input network is not modified.
    """
    metric = as_metric(config.metric)
    datasets = list(config.datasets)
    if not datasets:
        raise ValueError("need at least one dataset")
    for d in datasets:
        if d.inputs.shape[1] != net.in_width:
            raise ValueError(f"dataset {d.name!r} width {d.inputs.shape[1]} does not match network input {net.in_width}")
        if d.targets.shape[1] != net.out_width:
            raise ValueError(f"dataset {d.name!r} targets width {d.targets.shape[1]} does not match network output {net.out_width}")
    sizes = [d.inputs.shape[0] for d in datasets]
    steps = max(1, math.ceil(max(sizes) / config.batch_size))

    net = net.copy()
    rng = new_rng(config.seed)
    theta = net.parameter_vector()

    initial_loss, _ = _epoch_metrics(net, datasets, metric, config.weights, epoch=0)
    epoch_loss = np.empty(config.epochs)
    epoch_means = np.empty((config.epochs, len(datasets)))
    for epoch in range(config.epochs):
        perms = [rng.permutation(s) for s in sizes]
        for k in range(steps):
            batches = []
            for d, perm, s in zip(datasets, perms, sizes):
                lo = (k * s) // steps
                hi = ((k + 1) * s) // steps
                idx = perm[lo:hi]
                batches.append((d.inputs[idx], d.targets[idx]))
            if all(b[0].shape[0] == 0 for b in batches):
                continue
            loss, grad = loss_and_grad(net, batches, metric, config.weights)
            if not (np.isfinite(loss) and np.isfinite(grad).all()):
                raise TrainingError(
                    f"non-finite loss or gradient at epoch {epoch + 1}, batch {k + 1}",
                    epoch=epoch + 1, batch=k + 1,
                )
            theta -= config.learning_rate * grad
            if not np.isfinite(theta).all():
                raise TrainingError(
                    f"parameter update overflowed at epoch {epoch + 1}, batch {k + 1}",
                    epoch=epoch + 1, batch=k + 1,
                )
            if config.param_box is not None:
                np.clip(theta, -config.param_box, config.param_box, out=theta)
            net.set_parameter_vector(theta)
        epoch_loss[epoch], epoch_means[epoch] = _epoch_metrics(net, datasets, metric, config.weights, epoch=epoch + 1)

    final_acc = np.array([accuracy(net, d) for d in datasets])
    history = TrainHistory(
        loss=epoch_loss, dataset_means=epoch_means, final_accuracy=final_acc,
        initial_loss=initial_loss, dataset_names=tuple(d.name for d in datasets),
    )
    return net, history


def accuracy(net, dataset):
    """Fraction of samples whose argmax output matches the argmax target.

    np.argmax breaks ties toward the lowest index, for outputs and
    targets alike.
    """
    if dataset.inputs.shape[0] == 0:
        raise ValueError("dataset is empty")
    outputs = forward(net, dataset.inputs)
    return float(np.mean(np.argmax(outputs, axis=1) == np.argmax(dataset.targets, axis=1)))


def save_network(net, path):
    """Plain-text checkpoint.

    Layout: a version line; "layers N"; "shortcut none" or
    "shortcut SRC DST pre|post"; then per layer a header
    "layer I ACTIVATION OUT IN", OUT lines of IN row-major weights, and
    one line of OUT biases. Floats use repr-exact %.17g.
    """
    lines = [CHECKPOINT_HEADER, f"layers {len(net.layers)}"]
    if net.shortcut is None:
        lines.append("shortcut none")
    else:
        mode = "post" if net.shortcut_after_activation else "pre"
        lines.append(f"shortcut {net.shortcut[0]} {net.shortcut[1]} {mode}")
    for i, layer in enumerate(net.layers):
        lines.append(f"layer {i} {layer.activation} {layer.out_width} {layer.in_width}")
        for row in layer.weights:
            lines.append(" ".join(format(v, ".17g") for v in row))
        lines.append(" ".join(format(v, ".17g") for v in layer.bias))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CHECKPOINT_HEADER:
        raise ValueError(f"not a recognized checkpoint: {path}")
    n_layers = int(lines[1].split()[1])
    shortcut_parts = lines[2].split()
    if shortcut_parts[1] == "none":
        shortcut, after = None, False
    else:
        shortcut = (int(shortcut_parts[1]), int(shortcut_parts[2]))
        after = shortcut_parts[3] == "post"
    layers = []
    pos = 3
    for _ in range(n_layers):
        _, _, activation, out_w, in_w = lines[pos].split()
        out_w, in_w = int(out_w), int(in_w)
        pos += 1
        weights = np.array([[float(v) for v in lines[pos + r].split()] for r in range(out_w)])
        pos += out_w
        bias = np.array([float(v) for v in lines[pos].split()])
        pos += 1
        if weights.shape != (out_w, in_w) or bias.size != out_w:
            raise ValueError(f"checkpoint layer block is malformed at line {pos}")
        layers.append(DenseLayer(weights, bias, activation))
    return Network(layers=layers, shortcut=shortcut, shortcut_after_activation=after)
