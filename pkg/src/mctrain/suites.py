"""Randomized verification suites behind the `verify` command.

Each suite runs many independent trials of one theoretical claim and
returns CSV-serializable rows. A trial counts as a violation only when
its hypotheses were certified and the claimed inequality still failed;
uncertified trials are reported separately and never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .bounds import make_grid, quadratic_problem, verify_convergence, verify_estimation_bound
from .losses import SQUARED_ERROR
from .network import DenseLayer, Network, forward, init_network
from .pareto import DilatedCone, efficient_set, scalarization_argmin, weakly_efficient_set
from .stability import verify_input_stability, verify_label_stability
from .validation import new_rng

SUITE_NAMES = ("prop1", "prop2", "estimation", "convergence", "scalarization")


@dataclass
class SuiteResult:
    name: str
    header: tuple
    rows: list = field(default_factory=list)
    n_violations: int = 0
    n_uncertified: int = 0

    @property
    def passed(self):
        return self.n_violations == 0

    def to_csv(self):
        lines = [",".join(self.header)]
        for row in self.rows:
            lines.append(",".join(_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def summary(self):
        state = "pass" if self.passed else "FAIL"
        extra = f", {self.n_uncertified} uncertified" if self.n_uncertified else ""
        return f"{self.name}: {len(self.rows)} trials, {self.n_violations} violations{extra} [{state}]"


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def label_perturbation_suite(trials=1000, seed=0):
    """Random (network, dataset, label perturbation) trials of the
    label-side deviation bound with Euclidean distances."""
    rng = new_rng(seed)
    result = SuiteResult("prop1", ("trial", "lhs", "rhs", "holds"))
    for t in range(int(trials)):
        d = int(rng.integers(2, 8))
        k = int(rng.integers(1, 5))
        hidden = int(rng.integers(2, 8))
        net = init_network("mlp", (d, hidden, k), seed=int(rng.integers(0, 2**63)))
        n = int(rng.integers(2, 40))
        x = rng.uniform(0, 1, size=(n, d))
        y = rng.normal(size=(n, k))
        perturbed = y + rng.normal(scale=rng.uniform(0.01, 2.0), size=(n, k))
        data = SimpleNamespace(inputs=x, targets=y, name=f"trial{t}")
        report = verify_label_stability(forward(net, x), data, perturbed, SQUARED_ERROR)
        result.rows.append((t, report.lhs, report.rhs, report.holds))
        result.n_violations += 0 if report.holds else 1
    return result


def input_perturbation_suite(trials=1000, seed=0):
    """Random linear-model trials of the input-side deviation bound with
    the analytic constant K = ||weights||."""
    rng = new_rng(seed)
    result = SuiteResult("prop2", ("trial", "lhs", "rhs", "holds"))
    for t in range(int(trials)):
        d = int(rng.integers(2, 10))
        w = rng.normal(scale=rng.uniform(0.2, 3.0), size=(1, d))
        net = Network([DenseLayer(w, rng.normal(size=1), "identity")])
        n = int(rng.integers(2, 40))
        x = rng.uniform(0, 1, size=(n, d))
        y = rng.normal(size=(n, 1))
        xt = x + rng.normal(scale=rng.uniform(0.001, 0.5), size=(n, d))
        data = SimpleNamespace(inputs=x, targets=y, name=f"trial{t}")
        report = verify_input_stability(net, data, xt, SQUARED_ERROR, lipschitz_k=float(np.linalg.norm(w)))
        result.rows.append((t, report.lhs, report.rhs, report.holds))
        result.n_violations += 0 if report.holds else 1
    return result


def estimation_suite(trials=200, seed=0, grid_points=2001):
    """Random quadratic two-criterion instances of the argmin-excess bound.

    The reference minimizer (the beta-average of z0) is placed on the
    grid so the claimed order-2 growth constant 0.9 certifies; the
    order-1 Hoelder claim of 4 is the analytic slope bound on [-1, 1].
    """
    rng = new_rng(seed)
    grid = make_grid(-1, 1, grid_points)
    result = SuiteResult("estimation", ("trial", "excess", "bound", "holds", "certified"))
    for t in range(int(trials)):
        lam_star = float(grid[rng.integers(grid.shape[0] // 10, 9 * grid.shape[0] // 10), 0])
        b1 = float(rng.uniform(0.2, 0.8))
        betas = np.array([b1, 1.0 - b1])
        lo = max(-1.0, (lam_star - betas[1]) / betas[0])
        hi = min(1.0, (lam_star + betas[1]) / betas[0])
        z1 = float(rng.uniform(lo, hi))
        z0 = np.array([z1, (lam_star - betas[0] * z1) / betas[1]])
        z = rng.uniform(-1, 1, size=2)
        problem = quadratic_problem(z=z, z0=z0, betas=betas, grid=grid, iso_h=0.9, holder_m=4.0)
        report = verify_estimation_bound(problem, holder_seed=int(rng.integers(0, 2**63)))
        holds = bool(report.holds) if report.hypotheses_met else False
        result.rows.append((t, report.excess, report.bound, holds, report.hypotheses_met))
        if not report.hypotheses_met:
            result.n_uncertified += 1
        elif not report.holds:
            result.n_violations += 1
    return result


def convergence_suite(n_max=64, grid_points=101, rho=0.5):
    """Quadratic family with data perturbed along a fixed direction at
    rate 1/n; tracks the efficient-set excesses down to grid tolerance."""
    grid = make_grid(-1, 1, grid_points)
    z0 = np.array([-0.5, 0.5])
    problem = quadratic_problem(z=z0 + np.array([-0.6, 0.6]), z0=z0, betas=np.array([0.5, 0.5]), grid=grid)
    report = verify_convergence(problem, n_max=n_max, cone=DilatedCone(rho))
    result = SuiteResult("convergence", ("n", "weff_excess", "peff_excess", "within_tolerance"))
    for n, we, pe in zip(report.ns, report.weff_excess, report.peff_excess):
        result.rows.append((int(n), float(we), float(pe), bool(max(we, pe) <= report.tolerance)))
    if not (report.weff_converged and report.peff_converged):
        result.n_violations += 1
    return result


def scalarization_suite(trials=1000, dimensions=(2, 3, 4), seed=0):
    """Random finite objective sets: weighted-sum argmins must land in
    the efficient set (strictly positive weights) or the weakly efficient
    set (nonnegative weights)."""
    rng = new_rng(seed)
    result = SuiteResult(
        "scalarization", ("trial", "dimension", "strict_in_efficient", "nonneg_in_weak", "holds")
    )
    t = 0
    for p in dimensions:
        for _ in range(int(trials)):
            pts = rng.normal(size=(int(rng.integers(2, 30)), p))
            strict = rng.uniform(0.05, 1.0, size=p)
            nonneg = strict.copy()
            nonneg[rng.integers(0, p)] = 0.0
            ok_strict = set(scalarization_argmin(pts, strict)) <= set(efficient_set(pts))
            ok_nonneg = set(scalarization_argmin(pts, nonneg)) <= set(weakly_efficient_set(pts))
            holds = ok_strict and ok_nonneg
            result.rows.append((t, p, ok_strict, ok_nonneg, holds))
            result.n_violations += 0 if holds else 1
            t += 1
    return result


def run_suite(name, trials, seed):
    """Dispatch by suite name; trials means n_max for the convergence
    suite and the per-dimension count for the scalarization suite."""
    if name == "prop1":
        return label_perturbation_suite(trials, seed)
    if name == "prop2":
        return input_perturbation_suite(trials, seed)
    if name == "estimation":
        return estimation_suite(trials, seed)
    if name == "convergence":
        return convergence_suite(n_max=trials)
    if name == "scalarization":
        return scalarization_suite(trials, seed=seed)
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITE_NAMES}")
