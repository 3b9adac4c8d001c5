"""Free-boundary switching radii between radial and tangential motion.

Starting from the origin the solver alternates two searches:

* ``next_r(s)``: the first radius ``r > s`` where
  ``s f(s) + int_s^r f - r f(r)`` turns positive.  Beyond it, the slope of
  the radial value would fall below the tangential slope ``-2 r f(r)``.
* ``next_s(r)``: the first radius after ``r`` where the right derivative of
  ``f`` turns positive.

Costs increasing near the origin (case "I") start radially with ``s0 = 0``.
Costs decreasing near the origin (case "II") start tangentially with
``r0 = 0``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .cost import Monotone, RadialCost
from .errors import DivergentIntegral, NotMonotoneAtOrigin

log = logging.getLogger(__name__)

GRID_CELLS = 10_000
MAX_POINTS = 1000


@dataclass(frozen=True)
class SwitchingSchedule:
    """Ordered switching radii.

    ``points`` is a tuple of ``(label, radius)`` pairs with labels ``"r"``
    (radial to tangential) and ``"s"`` (tangential to radial), strictly
    increasing and inside ``(0, R)``.
    """

    case: str
    points: tuple
    R: float

    def __post_init__(self):
        if self.case not in ("I", "II"):
            raise ValueError("case must be 'I' or 'II'")
        pts = tuple((str(lab), float(val)) for lab, val in self.points)
        object.__setattr__(self, "points", pts)
        expected = "r" if self.case == "I" else "s"
        prev = 0.0
        for lab, val in pts:
            if lab != expected:
                raise ValueError(f"labels must alternate, got {lab!r} where {expected!r} was due")
            if not prev < val < self.R:
                raise ValueError("switching radii must increase strictly inside (0, R)")
            prev = val
            expected = "s" if lab == "r" else "r"

    @property
    def radii(self):
        return tuple(v for _, v in self.points)

    def labelled(self, label):
        return tuple(v for lab, v in self.points if lab == label)

    def tangential_intervals(self):
        """Closed radius intervals on which the tangential regime is used."""
        edges = ([0.0] if self.case == "II" else []) + list(self.radii)
        if len(edges) % 2:
            edges.append(self.R)
        return [(edges[i], edges[i + 1]) for i in range(0, len(edges), 2)]

    def with_point(self, index, value):
        """Copy with one switching radius replaced."""
        pts = list(self.points)
        pts[index] = (pts[index][0], value)
        return SwitchingSchedule(self.case, tuple(pts), self.R)

    def to_dict(self):
        return {"case": self.case, "R": self.R,
                "points": [{"label": lab, "value": val} for lab, val in self.points]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["case"], tuple((p["label"], p["value"]) for p in d["points"]), d["R"])

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _seed_product(cost, s):
    # s f(s) with the convention 0 * f(0) = 0 at the origin.
    return 0.0 if s == 0.0 else s * cost(s)


def average_gap(cost, s, r):
    """``s f(s) + int_s^r f - r f(r)``; vectorized in ``r``."""
    r = np.asarray(r, dtype=float)
    F = cost.antiderivative
    return _seed_product(cost, s) + (F(r) - F(s)) - r * cost(r)


def _first_crossing(predicate_values, tol):
    above = np.flatnonzero(predicate_values > tol)
    return int(above[0]) if above.size else None


def _bisect(fn, lo, hi, tol, width):
    # fn(lo) <= tol < fn(hi); shrink to the leftmost crossing.
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if fn(mid) > tol:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def next_r(cost: RadialCost, s_prev: float):
    """First radius after ``s_prev`` where tangential motion becomes cheaper."""
    R = cost.R
    if s_prev == 0.0 and not cost.origin_growth.f_integrable:
        raise DivergentIntegral("radial segment from the origin needs an integrable cost",
                                sign=cost.sign)
    grid = s_prev + (R - s_prev) * np.arange(1, GRID_CELLS + 1) / GRID_CELLS
    grid[-1] = R
    g = average_gap(cost, s_prev, grid)
    scale = max(1.0, float(np.max(np.abs(grid * cost(grid)))))
    tol = 1e-12 * scale
    k = _first_crossing(g, tol)
    if k is None:
        _note_tangency(g, grid, tol, "r", s_prev)
        return None
    lo = s_prev if k == 0 else grid[k - 1]
    root = _bisect(lambda x: float(average_gap(cost, s_prev, x)), lo, grid[k], tol, 1e-12 * R)
    return root if root < R else None


def next_s(cost: RadialCost, r_prev: float):
    """First radius after ``r_prev`` where the cost starts increasing."""
    R = cost.R
    grid = r_prev + (R - r_prev) * np.arange(1, GRID_CELLS + 1) / GRID_CELLS
    grid = grid[grid < R]
    slope = cost.right_derivative(grid)
    finite = np.abs(slope[np.isfinite(slope)])
    tol = 1e-12 * max(1.0, float(finite.max()) if finite.size else 1.0)
    k = _first_crossing(slope, tol)
    if k is None:
        _note_tangency(slope, grid, tol, "s", r_prev)
        return None
    lo = r_prev if k == 0 else grid[k - 1]
    root = _bisect(lambda x: float(cost.right_derivative(x)), lo, grid[k], tol, 1e-12 * R)
    # A slope that jumps up at a breakpoint switches exactly there.
    for c in tuple(cost.breakpoints[1:-1]) + tuple(cost.jumps):
        if abs(c - root) <= 2e-12 * R and float(cost.right_derivative(c)) > tol:
            root = c
            break
    return root if root < R else None


def _note_tangency(values, grid, tol, label, start):
    # A local maximum touching zero without crossing is skipped, not a switch.
    if values.size and np.max(values) > -1e3 * tol:
        i = int(np.argmax(values))
        log.info("tangency without crossing in %s-search after %.6g near r=%.6g", label, start, grid[i])


def _check_origin_monotone(cost):
    if cost.is_step:
        return
    eta = cost.eta
    probe = eta * np.linspace(1e-3, 1.0, 400, endpoint=False)
    slope = cost.right_derivative(probe)
    slope = slope[np.isfinite(slope)]
    tol = 1e-10 * max(1.0, float(np.max(np.abs(slope))) if slope.size else 1.0)
    if cost.origin_monotone is Monotone.INCREASING and np.any(slope < -tol):
        raise NotMonotoneAtOrigin(f"cost decreases somewhere on (0, {eta:g}) but is declared increasing")
    if cost.origin_monotone is Monotone.DECREASING and np.any(slope > tol):
        raise NotMonotoneAtOrigin(f"cost increases somewhere on (0, {eta:g}) but is declared decreasing")


def build_schedule(cost: RadialCost) -> SwitchingSchedule:
    """Alternate the two searches from the case-appropriate start."""
    _check_origin_monotone(cost)
    case = cost.case
    points = []
    if cost.is_step:
        return SwitchingSchedule(case, (), cost.R)
    searches = (("r", next_r), ("s", next_s)) if case == "I" else (("s", next_s), ("r", next_r))
    prev = 0.0
    while len(points) < MAX_POINTS:
        label, search = searches[len(points) % 2]
        found = search(cost, prev)
        if found is None:
            break
        points.append((label, found))
        prev = found
    return SwitchingSchedule(case, tuple(points), cost.R)
