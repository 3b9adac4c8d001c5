"""Finite-difference check of the radial HJB equation.

For a radial function the two extreme controls act through

    radial:      -V''/2            tangential:  -V'/(2 r)

A control mixing them with weight ``lam^2`` yields the affine combination,
so ``sup_lam`` sits at an endpoint.  The value function satisfies
``max(radial - f, tangential - f) = 0``, and the larger branch is the one
whose motion the optimal control uses.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .value import RADIAL, TANGENTIAL, PiecewiseValue, branch_at, eval_derivative, eval_second_derivative, eval_value

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass
class Residuals:
    r: np.ndarray
    radial: np.ndarray
    tangential: np.ndarray

    @property
    def combined(self):
        return np.maximum(self.radial, self.tangential)

    @property
    def active(self):
        return np.where(self.radial >= self.tangential, RADIAL, TANGENTIAL)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "res_radial", "res_tangential", "active_branch"])
            for row in zip(self.r, self.radial, self.tangential, self.active):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), row[3]])


def default_grid(v: PiecewiseValue, n=2000, h=None):
    """Grid on (eps, R - eps) avoiding every kink of V'' by 10 stencil widths.

    ``eps = 100 h`` keeps the stencil's relative truncation error near the
    origin at the 1e-4 level even when V' is singular there.
    """
    R = v.R
    h = 1e-4 * R if h is None else h
    eps = 100 * h
    grid = np.linspace(eps, R - eps, n)
    kinks = np.array(sorted(set(v.schedule.radii) | set(v.cost.jumps) | set(v.cost.breakpoints[1:-1])))
    if kinks.size:
        dist = np.min(np.abs(grid[:, None] - kinks[None, :]), axis=1)
        grid = grid[dist > 10 * h]
    return grid


def residuals(v: PiecewiseValue, cost=None, grid=None, h=None, value_fn=None) -> Residuals:
    """Residuals of both branches from central differences of the value.

    ``value_fn`` replaces the value function (used to test perturbed values).
    """
    cost = v.cost if cost is None else cost
    h = 1e-4 * v.R if h is None else h
    grid = default_grid(v, h=h) if grid is None else np.asarray(grid, dtype=float)
    V = (lambda r: eval_value(v, r)) if value_fn is None else value_fn
    lo, mid, hi = V(grid - h), V(grid), V(grid + h)
    d1 = (hi - lo) / (2 * h)
    d2 = (hi - 2 * mid + lo) / (h * h)
    f = cost(grid)
    return Residuals(grid, -0.5 * d2 - f, -d1 / (2 * grid) - f)


@dataclass
class HJBReport:
    status: str
    tolerance: float
    max_abs_combined: float
    max_branch_excess: float
    worst: list  # (r, res_radial, res_tangential) rows, worst first
    branch_mismatches: int
    residuals: Residuals | None

    def summary(self):
        if self.status == SKIP:
            return "SKIP: cost is discontinuous"
        return (f"{self.status}: max|max(res)|={self.max_abs_combined:.3e}, "
                f"max excess={self.max_branch_excess:.3e}, tol={self.tolerance:.3e}")


def verify(v: PiecewiseValue, cost=None, tol=1e-3, grid=None, value_fn=None, n_worst=5) -> HJBReport:
    """PASS when ``max(res_radial, res_tangential)`` vanishes and neither branch exceeds it.

    The tolerance is scaled by ``max|f|`` over the grid.  Discontinuous costs
    are skipped.
    """
    cost = v.cost if cost is None else cost
    if cost.is_step:
        return HJBReport(SKIP, tol, math.nan, math.nan, [], 0, None)
    res = residuals(v, cost, grid, value_fn=value_fn)
    scale = max(1.0, float(np.max(np.abs(cost(res.r)))))
    tol_eff = tol * scale
    comb = res.combined
    bad = np.abs(comb)
    order = np.argsort(-bad)[:n_worst]
    worst = [(float(res.r[i]), float(res.radial[i]), float(res.tangential[i])) for i in order]
    # Branch labels only mean something where the two residuals separate.
    split = np.abs(res.radial - res.tangential) > tol_eff
    expected = np.array([branch_at(v, r) for r in res.r])
    mismatches = int(np.sum((expected != res.active) & split))
    # |max| <= tol already bounds both branches from above.
    ok = bool(np.all(bad <= tol_eff))
    return HJBReport(PASS if ok else FAIL, tol_eff, float(bad.max()), float(comb.max()),
                     worst, mismatches, res)


def generator_scan(v: PiecewiseValue, r, n_lam=101):
    """sup over lam in [0, 1] of the mixed generator applied to V at radius r."""
    lam2 = np.linspace(0.0, 1.0, n_lam) ** 2
    d1 = eval_derivative(v, r, "right")
    d2 = eval_second_derivative(v, r)
    values = -0.5 * lam2 * d2 - (1.0 - lam2) * d1 / (2.0 * r)
    return float(values.max())


def hessian(v: PiecewiseValue, x):
    """Hessian of ``x -> V(|x|)`` at a nonzero point."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    d1 = eval_derivative(v, r, "right")
    d2 = eval_second_derivative(v, r)
    u = x / r
    return (d2 - d1 / r) * np.outer(u, u) + (d1 / r) * np.eye(x.size)
