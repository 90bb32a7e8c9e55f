"""IDX ingestion, normalization, deterministic splitting, and Gaussian
noise augmentation.

IDX layout (all integers big endian):

    images  u32 magic 2051 | u32 count | u32 rows | u32 cols | count*rows*cols bytes
    labels  u32 magic 2049 | u32 count | count bytes

Pixel bytes are brightness values in 0..255; normalization divides by
255 and flattens row-major, so inputs live in [0, 1]^d with d read from
the file header. Every randomized operation takes an explicit seed and
draws from numpy's PCG64 stream (see validation.new_rng), which makes
the whole data pipeline reproducible bit for bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .validation import new_rng

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
N_CLASSES = 10


class IdxFormatError(ValueError):
    """Malformed IDX file (bad magic number or header)."""


@dataclass(frozen=True)
class RawDataset:
    """Images and labels exactly as stored on disk."""

    images: np.ndarray  # uint8, (count, rows, cols)
    labels: np.ndarray  # uint8, (count,)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.uint8)
        labels = np.asarray(self.labels, dtype=np.uint8)
        if images.ndim != 3:
            raise ValueError(f"images must be (count, rows, cols), got shape {images.shape}")
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        if images.shape[0] != labels.shape[0]:
            raise ValueError(
                f"image count {images.shape[0]} does not match label count {labels.shape[0]}"
            )
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @property
    def count(self):
        return self.images.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    """Flattened inputs in [0, 1]^d with one-hot targets.

    source_sigma records the standard deviation of any Gaussian noise the
    inputs were augmented with (0 for untouched data).
    """

    inputs: np.ndarray  # float64, (n, d)
    targets: np.ndarray  # float64 one-hot, (n, k)
    name: str = ""
    source_sigma: float = 0.0

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise ValueError("inputs and targets must be 2-D")
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError(
                f"inputs have {inputs.shape[0]} rows but targets have {targets.shape[0]}"
            )
        if inputs.size and (inputs.min() < 0.0 or inputs.max() > 1.0):
            raise ValueError("inputs must lie in [0, 1]")
        if targets.size:
            is_binary = ((targets == 0.0) | (targets == 1.0)).all()
            if not is_binary or not (targets.sum(axis=1) == 1.0).all():
                raise ValueError("targets must be one-hot rows")
        if self.source_sigma < 0:
            raise ValueError("source_sigma must be nonnegative")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n_samples(self):
        return self.inputs.shape[0]

    @property
    def n_features(self):
        return self.inputs.shape[1]

    @property
    def n_classes(self):
        return self.targets.shape[1]

    @property
    def label_indices(self):
        return np.argmax(self.targets, axis=1)


@dataclass(frozen=True)
class SplitSpec:
    """How to divide a dataset: number of parts, shuffle seed, and the
    noise level intended for each part (the first is conventionally 0)."""

    parts: int
    seed: int
    sigmas: tuple

    def __post_init__(self):
        if self.parts < 1:
            raise ValueError("parts must be >= 1")
        sigmas = tuple(float(s) for s in self.sigmas)
        if len(sigmas) != self.parts:
            raise ValueError(f"need {self.parts} sigmas, got {len(sigmas)}")
        if any(s < 0 for s in sigmas):
            raise ValueError("sigmas must be nonnegative")
        object.__setattr__(self, "sigmas", sigmas)


def _read_u32(fh, path, what):
    data = fh.read(4)
    if len(data) < 4:
        raise EOFError(f"{path}: file ended while reading {what}")
    return struct.unpack(">I", data)[0]


def load_idx(images_path, labels_path):
    """Read an images/labels file pair and cross-check their counts."""
    with open(images_path, "rb") as fh:
        magic = _read_u32(fh, images_path, "magic number")
        if magic != IMAGE_MAGIC:
            raise IdxFormatError(
                f"{images_path}: magic number {magic} is not the image magic {IMAGE_MAGIC}"
            )
        count = _read_u32(fh, images_path, "image count")
        rows = _read_u32(fh, images_path, "row count")
        cols = _read_u32(fh, images_path, "column count")
        payload = fh.read(count * rows * cols)
        if len(payload) < count * rows * cols:
            raise EOFError(
                f"{images_path}: expected {count * rows * cols} pixel bytes, got {len(payload)}"
            )
        images = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)
    with open(labels_path, "rb") as fh:
        magic = _read_u32(fh, labels_path, "magic number")
        if magic != LABEL_MAGIC:
            raise IdxFormatError(
                f"{labels_path}: magic number {magic} is not the label magic {LABEL_MAGIC}"
            )
        label_count = _read_u32(fh, labels_path, "label count")
        payload = fh.read(label_count)
        if len(payload) < label_count:
            raise EOFError(f"{labels_path}: expected {label_count} label bytes, got {len(payload)}")
        labels = np.frombuffer(payload, dtype=np.uint8)
    if count != label_count:
        raise ValueError(
            f"{images_path} holds {count} images but {labels_path} holds {label_count} labels"
        )
    return RawDataset(images=images, labels=labels)


def write_idx(images_path, labels_path, images, labels):
    """Write an images/labels pair in IDX layout (the inverse of load_idx)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    if images.ndim != 3 or labels.ndim != 1 or images.shape[0] != labels.shape[0]:
        raise ValueError("images must be (count, rows, cols) with matching labels")
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


def center_crop(raw, rows, cols):
    """Center-crop every image, e.g. to 20x20."""
    r0 = (raw.images.shape[1] - rows) // 2
    c0 = (raw.images.shape[2] - cols) // 2
    if r0 < 0 or c0 < 0:
        raise ValueError(f"cannot crop {raw.images.shape[1:]} images to ({rows}, {cols})")
    return RawDataset(images=raw.images[:, r0 : r0 + rows, c0 : c0 + cols], labels=raw.labels)


def normalize(raw, name=""):
    """Scale pixels to [0, 1], flatten row-major, one-hot encode labels."""
    if raw.labels.size and raw.labels.max() >= N_CLASSES:
        bad = int(raw.labels.max())
        raise ValueError(f"label {bad} outside 0..{N_CLASSES - 1}")
    inputs = raw.images.reshape(raw.count, -1).astype(np.float64) / 255.0
    return LabeledDataset(inputs=inputs, targets=one_hot(raw.labels), name=name)


def one_hot(labels, n_classes=N_CLASSES):
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def select(data, indices, name=None):
    """Row subset of a dataset (metadata preserved unless renamed)."""
    indices = np.asarray(indices, dtype=np.intp)
    return LabeledDataset(
        inputs=data.inputs[indices],
        targets=data.targets[indices],
        name=data.name if name is None else name,
        source_sigma=data.source_sigma,
    )


def subsample(data, n, seed, name=None):
    """First n rows of a seeded permutation."""
    n = int(n)
    if not 0 < n <= data.n_samples:
        raise ValueError(f"cannot draw {n} samples from {data.n_samples}")
    perm = new_rng(seed).permutation(data.n_samples)
    return select(data, perm[:n], name=name)


def split(data, split_spec):
    """Shuffle with split_spec.seed, then cut into split_spec.parts pieces.

    Sizes differ by at most one; the remainder goes to the earlier parts.
    The parts are disjoint and their union is the input, so concatenating
    and re-sorting the rows reproduces the original multiset.
    """
    n = data.n_samples
    if split_spec.parts > n:
        raise ValueError(f"cannot split {n} samples into {split_spec.parts} parts")
    perm = new_rng(split_spec.seed).permutation(n)
    base, rem = divmod(n, split_spec.parts)
    parts = []
    offset = 0
    for i in range(split_spec.parts):
        size = base + (1 if i < rem else 0)
        idx = perm[offset : offset + size]
        offset += size
        parts.append(select(data, idx, name=f"{data.name}/part{i + 1}" if data.name else f"part{i + 1}"))
    return parts


def add_gaussian_noise(data, sigma, seed):
    """Add independent zero-mean Gaussian noise to every input entry,
    then clamp back into [0, 1]. Targets are untouched."""
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    noise = new_rng(seed).normal(0.0, sigma, size=data.inputs.shape) if sigma > 0 else 0.0
    noisy = np.clip(data.inputs + noise, 0.0, 1.0)
    return LabeledDataset(inputs=noisy, targets=data.targets, name=data.name, source_sigma=sigma)


CSV_FLOAT_FORMAT = "%.9g"


def save_csv(data, path):
    """Dump as CSV: one row per sample, label index first, then inputs."""
    matrix = np.column_stack([data.label_indices.astype(np.float64), data.inputs])
    header = "label," + ",".join(f"x{j}" for j in range(data.n_features))
    np.savetxt(path, matrix, fmt=CSV_FLOAT_FORMAT, delimiter=",", header=header, comments="")


def load_csv(path, name="", source_sigma=0.0, n_classes=N_CLASSES):
    matrix = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    labels = matrix[:, 0].astype(np.intp)
    return LabeledDataset(
        inputs=matrix[:, 1:], targets=one_hot(labels, n_classes), name=name, source_sigma=source_sigma
    )
