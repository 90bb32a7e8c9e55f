import numpy as np
import pytest

from mctrain.datasets import write_idx
from mctrain.validation import new_rng


def make_digit_files(directory, n_samples, seed=0, rows=28, cols=28):
    """Write a synthetic handwritten-digit stand-in as an IDX pair.

    Ten smooth class prototypes (low-frequency random patterns), plus
    per-sample pixel noise and small cyclic shifts. Separable enough for
    a small perceptron, but not trivially so.
    """
    rng = new_rng(seed)
    base = rng.uniform(0, 255, size=(10, rows // 4, cols // 4))
    prototypes = np.kron(base, np.ones((4, 4)))
    labels = rng.integers(0, 10, size=n_samples)
    images = prototypes[labels] + rng.normal(0, 120.0, size=(n_samples, rows, cols))
    shifts = rng.integers(-4, 5, size=(n_samples, 2))
    for i in range(n_samples):
        images[i] = np.roll(images[i], tuple(shifts[i]), axis=(0, 1))
    images = np.clip(images, 0, 255).astype(np.uint8)
    images_path = directory / "train-images-idx3-ubyte"
    labels_path = directory / "train-labels-idx1-ubyte"
    write_idx(images_path, labels_path, images, labels.astype(np.uint8))
    return images_path, labels_path


@pytest.fixture(scope="session")
def digit_idx_small(tmp_path_factory):
    directory = tmp_path_factory.mktemp("digits-small")
    return make_digit_files(directory, n_samples=400, seed=11)


@pytest.fixture(scope="session")
def digit_idx_large(tmp_path_factory):
    directory = tmp_path_factory.mktemp("digits-large")
    return make_digit_files(directory, n_samples=7500, seed=12)
