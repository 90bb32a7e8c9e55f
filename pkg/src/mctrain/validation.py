"""Shared input validation helpers."""

from __future__ import annotations

import numpy as np


def new_rng(seed):
    """Seeded PCG64 generator.

    PCG64 is part of the package contract: every randomized operation in
    this package draws from it, so results are reproducible bit for bit
    for a given seed.
    """
    return np.random.Generator(np.random.PCG64(int(seed)))


def as_float_matrix(x, name="array"):
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_float_vector(x, name="array"):
    """Coerce to a 1-D float64 array with finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_shape(a, b, name_a="first", name_b="second"):
    if a.shape != b.shape:
        raise ValueError(f"{name_a} and {name_b} must have the same shape, got {a.shape} vs {b.shape}")


def check_consistent_rows(a, b, name_a="first", name_b="second"):
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"{name_a} has {a.shape[0]} rows but {name_b} has {b.shape[0]}")
