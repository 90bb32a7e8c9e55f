"""Grid-based verification of minimizer-set perturbation bounds.

A SyntheticProblem packages a finite grid over the parameter box, a
reference data vector and a perturbed one, per-criterion functions
g_i(lam, z_i), weighting betas, and claimed growth/Hoelder constants.
The verifiers certify the claimed constants numerically on the grid and
then check that the excess of the perturbed argmin set over the
reference argmin set stays within the theoretical bound

    (2 m / h)^(1/alpha) * (sum_i |z_i - z0_i|^delta)^(1/alpha).

Everything runs at grid resolution; the grid spacing is part of the
reported tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .pareto import DilatedCone, efficient_set, excess, properly_efficient_set, weakly_efficient_set
from .validation import as_float_vector, new_rng

# relative slack for comparing measured constants against claimed ones
CERT_RTOL = 1e-9


@dataclass(frozen=True)
class SyntheticProblem:
    """A finite multi-criteria instance with claimed regularity constants.

    grid       parameter sample, shape (G, k); 1-D grids may be passed flat
    z, z0      perturbed and reference data vectors, one scalar per criterion
    criteria   callables g_i(lam_grid, z_i) -> (G,), vectorized over the grid
    betas      positive weights summing to 1 for the scalarized objective
    iso_alpha, iso_h       claimed isolated-minimizer order and constant at z0
    holder_delta, holder_m claimed Hoelder order and constant of g_i in z
    z_low, z_high          box from which Hoelder certification samples z pairs
    spacing    grid resolution, used as the comparison tolerance
    """

    grid: np.ndarray
    z: np.ndarray
    z0: np.ndarray
    criteria: Sequence[Callable]
    betas: np.ndarray
    iso_alpha: float = 2.0
    iso_h: float = 1.0
    holder_delta: float = 1.0
    holder_m: float = 1.0
    z_low: float = -1.0
    z_high: float = 1.0
    spacing: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim == 1:
            grid = grid.reshape(-1, 1)
        if grid.shape[0] == 0:
            raise ValueError("grid is empty")
        object.__setattr__(self, "grid", grid)
        z = as_float_vector(self.z, "z")
        z0 = as_float_vector(self.z0, "z0")
        betas = as_float_vector(self.betas, "betas")
        if not (len(self.criteria) == z.size == z0.size == betas.size):
            raise ValueError("criteria, z, z0 and betas must all have the same length")
        if (betas <= 0).any():
            raise ValueError("betas must be strictly positive")
        if abs(betas.sum() - 1.0) > 1e-9:
            raise ValueError("betas must sum to 1")
        for name in ("iso_alpha", "iso_h", "holder_delta", "holder_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "betas", betas)
        spacing = float(self.spacing) if self.spacing else _min_spacing(grid)
        object.__setattr__(self, "spacing", spacing)

    @property
    def n_criteria(self):
        return len(self.criteria)

    def criteria_matrix(self, data):
        """(G, N) matrix of g_i values over the grid for the given data vector."""
        data = as_float_vector(data, "data")
        cols = [np.asarray(g(self.grid, zi), dtype=np.float64) for g, zi in zip(self.criteria, data)]
        return np.column_stack(cols)

    def scalarized(self, data):
        """(G,) weighted objective sum over the grid."""
        return self.criteria_matrix(data) @ self.betas


def _min_spacing(grid):
    if grid.shape[0] < 2:
        return 0.0
    if grid.shape[1] == 1:
        vals = np.sort(grid[:, 0])
        return float(np.diff(vals).min())
    d2 = ((grid[:, None, :] - grid[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


def make_grid(low, high, n_points):
    """Regular 1-D grid as a (n, 1) array."""
    return np.linspace(float(low), float(high), int(n_points)).reshape(-1, 1)


def quadratic_problem(z, z0, betas, grid, iso_h=1.0, holder_m=4.0, **kwargs):
    """The (lam - z_i)^2 family on a shared grid.

    With betas summing to 1 the scalarized objective is
    (lam - sum_i beta_i z_i)^2 plus a constant, so the exact minimizer is
    the beta-average of the data and the growth order is 2 with constant 1.
    On [-1, 1]^2 the slope |2 lam - z1 - z2| never exceeds 4, so order-1
    Hoelder continuity holds with constant 4.
    """
    z = as_float_vector(z, "z")

    def criterion(lam_grid, zi):
        return (lam_grid[:, 0] - zi) ** 2

    criteria = [criterion] * z.size
    return SyntheticProblem(
        grid=grid, z=z, z0=z0, criteria=criteria, betas=betas,
        iso_alpha=2.0, iso_h=iso_h, holder_delta=1.0, holder_m=holder_m, **kwargs,
    )


def argmin_set(problem, which="z0"):
    """Grid indices attaining the scalarized minimum (exact ties kept)."""
    values = problem.scalarized(_pick(problem, which))
    return np.flatnonzero(values == values.min())


def _pick(problem, which):
    if which == "z0":
        return problem.z0
    if which == "z":
        return problem.z
    raise ValueError("which must be 'z' or 'z0'")


def isolated_minimizer_constant(problem, which="z0", alpha=None, grid_mask=None):
    """Smallest growth ratio (l(lam) - l(lam0)) / ||lam - lam0||^alpha.

    A positive return value certifies order-alpha growth away from the
    grid minimizer, at grid resolution. The minimizer must be unique on
    the grid.
    """
    alpha = problem.iso_alpha if alpha is None else float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    grid = problem.grid if grid_mask is None else problem.grid[grid_mask]
    values = problem.scalarized(_pick(problem, which))
    if grid_mask is not None:
        values = values[grid_mask]
    minima = np.flatnonzero(values == values.min())
    if minima.size != 1:
        raise ValueError(
            f"grid too coarse to isolate a unique minimizer: {minima.size} grid points tie at the minimum"
        )
    i0 = minima[0]
    dist = np.sqrt(((grid - grid[i0]) ** 2).sum(axis=1))
    mask = np.arange(grid.shape[0]) != i0
    ratios = (values[mask] - values[i0]) / dist[mask] ** alpha
    return float(ratios.min())


def holder_constant(problem, delta=None, n_samples=4096, seed=0):
    """Largest sampled ratio |g_i(lam, z1) - g_i(lam, z2)| / |z1 - z2|^delta.

    Samples lam from the grid and z pairs uniformly from
    [z_low, z_high]; coincident pairs are skipped.
    """
    delta = problem.holder_delta if delta is None else float(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    rng = new_rng(seed)
    lam_idx = rng.integers(0, problem.grid.shape[0], size=int(n_samples))
    lam = problem.grid[lam_idx]
    z1 = rng.uniform(problem.z_low, problem.z_high, size=int(n_samples))
    z2 = rng.uniform(problem.z_low, problem.z_high, size=int(n_samples))
    gap = np.abs(z1 - z2)
    keep = gap > 0
    if not keep.any():
        raise ValueError("all sampled z pairs coincide; cannot estimate a Hoelder constant")
    lam, z1, z2, gap = lam[keep], z1[keep], z2[keep], gap[keep]
    worst = 0.0
    for g in problem.criteria:
        ratios = np.abs(g(lam, z1) - g(lam, z2)) / gap**delta
        worst = max(worst, float(ratios.max()))
    return worst


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one excess-vs-bound check.

    holds is None when the claimed constants failed numerical
    certification; the inequality is then not asserted either way.
    """

    excess: float
    bound: float
    holds: bool | None
    minimizer_z: np.ndarray
    minimizer_z0: np.ndarray
    hypotheses_met: bool
    h_measured: float
    m_measured: float
    tolerance: float

    def summary(self):
        if not self.hypotheses_met:
            return (
                f"hypotheses-not-met (growth {self.h_measured:.6g}, "
                f"Hoelder {self.m_measured:.6g}); inequality not assessed"
            )
        verdict = "holds" if self.holds else "VIOLATED"
        return f"excess {self.excess:.6g} vs bound {self.bound:.6g} (+{self.tolerance:.3g} grid tol): {verdict}"


def verify_estimation_bound(problem, local_neighborhood=None, holder_samples=4096, holder_seed=0):
    """Check excess(argmin_z, argmin_z0) against the perturbation bound.

    First certifies the claimed constants on the grid: the measured
    growth constant at z0 must reach iso_h and the sampled Hoelder
    constant must not exceed holder_m. When a local_neighborhood radius
    is given, the whole check runs on the subgrid within that radius of
    the reference minimizer (the local variant of the bound).
    """
    grid_mask = None
    if local_neighborhood is not None:
        radius = float(local_neighborhood)
        if radius <= 0:
            raise ValueError("local_neighborhood must be positive")
        values0 = problem.scalarized(problem.z0)
        anchor = problem.grid[int(np.argmin(values0))]
        grid_mask = np.sqrt(((problem.grid - anchor) ** 2).sum(axis=1)) <= radius

    h_measured = isolated_minimizer_constant(problem, "z0", grid_mask=grid_mask)
    m_measured = holder_constant(problem, n_samples=holder_samples, seed=holder_seed)
    h_ok = h_measured >= problem.iso_h * (1.0 - CERT_RTOL)
    m_ok = m_measured <= problem.holder_m * (1.0 + CERT_RTOL)
    hypotheses_met = bool(h_ok and m_ok)

    grid = problem.grid if grid_mask is None else problem.grid[grid_mask]
    vals_z = problem.scalarized(problem.z)
    vals_z0 = problem.scalarized(problem.z0)
    if grid_mask is not None:
        vals_z = vals_z[grid_mask]
        vals_z0 = vals_z0[grid_mask]
    s_z = grid[np.flatnonzero(vals_z == vals_z.min())]
    s_z0 = grid[np.flatnonzero(vals_z0 == vals_z0.min())]

    gap = float(np.sum(np.abs(problem.z - problem.z0) ** problem.holder_delta))
    bound = (2.0 * problem.holder_m / problem.iso_h) ** (1.0 / problem.iso_alpha) * gap ** (1.0 / problem.iso_alpha)
    exc = excess(s_z, s_z0)
    tolerance = 2.0 * problem.spacing
    holds = bool(exc <= bound + tolerance) if hypotheses_met else None
    return BoundReport(
        excess=exc, bound=bound, holds=holds,
        minimizer_z=s_z[0], minimizer_z0=s_z0[0],
        hypotheses_met=hypotheses_met, h_measured=h_measured, m_measured=m_measured,
        tolerance=tolerance,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Distances from perturbed efficient sets to the limit sets, per step."""

    ns: np.ndarray
    weff_excess: np.ndarray
    peff_excess: np.ndarray
    spacing: float

    @property
    def tolerance(self):
        return 2.0 * self.spacing

    @property
    def weff_converged(self):
        return bool(self.weff_excess[-1] <= self.tolerance)

    @property
    def peff_converged(self):
        return bool(self.peff_excess[-1] <= self.tolerance)

    def summary(self):
        state = "converged" if (self.weff_converged and self.peff_converged) else "NOT converged"
        return (
            f"n={int(self.ns[-1])}: weakly-efficient excess {self.weff_excess[-1]:.6g}, "
            f"properly-efficient excess {self.peff_excess[-1]:.6g} "
            f"(tolerance {self.tolerance:.3g}): {state}"
        )


def inverse_schedule(z0, direction, scale=1.0):
    """Schedule n -> z0 + (scale / n) * direction."""
    z0 = as_float_vector(z0, "z0")
    direction = as_float_vector(direction, "direction")
    if z0.shape != direction.shape:
        raise ValueError("z0 and direction must have the same shape")

    def schedule(n):
        return z0 + (scale / n) * direction

    return schedule


def verify_convergence(problem, schedule=None, n_max=64, cone=None):
    """Track how the efficient sets of perturbed data approach the limit sets.

    For each n the data is schedule(n) (default: z0 + direction/n with
    direction = z - z0). The report records the excess of the perturbed
    weakly-efficient grid set over the limit weakly-efficient set, and of
    the perturbed properly-efficient set over the limit efficient set.
    An empty properly-efficient set contributes excess 0.
    """
    if schedule is None:
        schedule = inverse_schedule(problem.z0, problem.z - problem.z0)
    if cone is None:
        cone = DilatedCone(0.5)
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")

    base = problem.criteria_matrix(problem.z0)
    weff_base = problem.grid[weakly_efficient_set(base)]
    eff_base = problem.grid[efficient_set(base)]

    ns = np.arange(1, n_max + 1)
    weff_exc = np.empty(n_max)
    peff_exc = np.empty(n_max)
    for j, n in enumerate(ns):
        objective = problem.criteria_matrix(schedule(int(n)))
        weff_n = problem.grid[weakly_efficient_set(objective)]
        weff_exc[j] = excess(weff_n, weff_base)
        peff_idx = properly_efficient_set(objective, cone)
        peff_exc[j] = excess(problem.grid[peff_idx], eff_base) if peff_idx.size else 0.0
    return ConvergenceReport(ns=ns, weff_excess=weff_exc, peff_excess=peff_exc, spacing=problem.spacing)
