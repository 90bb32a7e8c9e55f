"""Brute-force efficiency analysis on finite sets of objective vectors.

All operations take an explicit finite set of points in objective space
and compare points pairwise. The O(n^2) sweep is deliberate: these
functions serve as reference oracles, not as scalable front extractors.
Minimization orientation throughout: smaller is better in every
component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_float_matrix, as_float_vector


@dataclass(frozen=True)
class ObjectivePointSet:
    """Finite set of points in R^p, optionally labeled by candidate id."""

    points: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        points = as_float_matrix(self.points, "points")
        if points.shape[0] == 0:
            raise ValueError("point set is empty")
        if self.labels is not None and len(self.labels) != points.shape[0]:
            raise ValueError("labels length does not match point count")
        object.__setattr__(self, "points", points)

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dimension(self):
        return self.points.shape[1]


def _points_of(point_set):
    if isinstance(point_set, ObjectivePointSet):
        return point_set.points
    return ObjectivePointSet(np.asarray(point_set, dtype=np.float64)).points


def dominates(a, b):
    """True iff a <= b componentwise and a != b."""
    a = as_float_vector(a, "a")
    b = as_float_vector(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"points have different dimensions: {a.size} vs {b.size}")
    return bool((a <= b).all() and (a < b).any())


def efficient_set(point_set):
    """Indices of points dominated by no other point."""
    pts = _points_of(point_set)
    le = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    lt = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    dominated = (le & lt).any(axis=0)
    return np.flatnonzero(~dominated)


def weakly_efficient_set(point_set):
    """Indices of points with no other point strictly smaller in every component."""
    pts = _points_of(point_set)
    strictly_below = (pts[:, None, :] < pts[None, :, :]).all(axis=2)
    return np.flatnonzero(~strictly_below.any(axis=0))


@dataclass(frozen=True)
class DilatedCone:
    """The cone {y : min_i y_i >= -rho * ||y||_2}, a dilation of the
    nonnegative orthant.

    Contains the orthant for every rho > 0, and every nonzero orthant
    point is interior. For rho >= 1 the membership test is satisfied by
    every vector (||y||_2 >= |y_i| componentwise), so the cone degenerates
    to the whole space and no point of a non-singleton set passes the
    proper-efficiency test; meaningful dilations use rho in (0, 1).
    """

    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    def contains(self, vectors):
        """Rowwise membership test; a single vector is also accepted."""
        arr = np.asarray(vectors, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr.reshape(1, -1)
        norms = np.sqrt((arr**2).sum(axis=1))
        inside = arr.min(axis=1) >= -self.rho * norms
        return bool(inside[0]) if single else inside


def properly_efficient_set(point_set, cone):
    """Indices of points y such that no other point lies in y - C \\ {y}.

    The cone order refines plain dominance, so the result is always a
    subset of efficient_set for any rho > 0.
    """
    pts = _points_of(point_set)
    if not isinstance(cone, DilatedCone):
        raise TypeError("cone must be a DilatedCone")
    keep = np.ones(pts.shape[0], dtype=bool)
    for i in range(pts.shape[0]):
        diffs = pts[i] - pts
        nonzero = (diffs != 0).any(axis=1)
        if (cone.contains(diffs) & nonzero).any():
            keep[i] = False
    return np.flatnonzero(keep)


def scalarization_argmin(point_set, betas):
    """All indices minimizing the beta-weighted sum of components.

    Exact-value ties are kept; the argmin set is invariant under positive
    rescaling of betas.
    """
    pts = _points_of(point_set)
    betas = as_float_vector(betas, "betas")
    if (betas < 0).any():
        raise ValueError("betas must be nonnegative")
    if not (betas > 0).any():
        raise ValueError("betas must not be all zero")
    if betas.size != pts.shape[1]:
        raise ValueError(f"betas has length {betas.size}, expected {pts.shape[1]}")
    values = pts @ betas
    return np.flatnonzero(values == values.min())


def excess(a_set, c_set):
    """sup over a in A of the Euclidean distance from a to C.

    Asymmetric: excess(A, C) = 0 whenever A is contained in C, regardless
    of how much larger C is.
    """
    a = as_float_matrix(np.atleast_2d(a_set), "a_set")
    c = as_float_matrix(np.atleast_2d(c_set), "c_set")
    if a.shape[0] == 0 or c.shape[0] == 0:
        raise ValueError("excess needs nonempty point sets")
    if a.shape[1] != c.shape[1]:
        raise ValueError("point sets have different dimensions")
    d2 = ((a[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).max())
