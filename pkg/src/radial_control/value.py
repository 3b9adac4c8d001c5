"""Construction and evaluation of the radial value function.

Between switching radii the value follows one of two branches:

* radial, on ``(a, b]`` with ``V'' = -2 f`` and ``V'(a+) = -2 a f(a)``
  (zero slope when ``a = 0``);
* tangential, on ``(a, b]`` with ``V' = -2 r f(r)``.

Integrating backwards from ``V(R) = 0`` fixes the additive constant.  Every
integral is expressed through the cost's antiderivatives ``F`` and ``G``, so
the construction is exact up to rounding.  :func:`closed_form_value` offers a
second route based on numerical quadrature of ``f`` only.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .cost import RadialCost
from .errors import DivergentIntegral, OriginValueInfinite
from .switching import SwitchingSchedule

RADIAL = "radial"
TANGENTIAL = "tangential"


@dataclass(frozen=True)
class Segment:
    a: float
    b: float
    branch: str
    seed_slope: float  # V'(a+) on radial segments, nan on tangential ones
    value_at_b: float


@dataclass(frozen=True)
class PiecewiseValue:
    cost: RadialCost
    schedule: SwitchingSchedule
    segments: tuple
    alpha_const: float
    frak_F: tuple

    @property
    def R(self):
        return self.cost.R


def _edges(schedule, R):
    # Segment boundaries and the branch of the first segment.
    edges = [0.0, *schedule.radii, R]
    first = RADIAL if schedule.case == "I" else TANGENTIAL
    return edges, first


def _segment_value(cost, seg, r):
    """V(r) for r in [a, b] from the segment's own anchor at b."""
    F, G = cost.antiderivative, cost.moment_antiderivative
    a, b = seg.a, seg.b
    if seg.branch == TANGENTIAL:
        return seg.value_at_b + 2.0 * (G(b) - G(r))
    Fa = F(a)
    return (seg.value_at_b - seg.seed_slope * (b - r)
            + 2.0 * ((b - r) * (F(r) - Fa) + b * (F(b) - F(r)) - (G(b) - G(r))))


def build_value(cost: RadialCost, schedule: SwitchingSchedule, strict=True) -> PiecewiseValue:
    """Assemble the value function segment by segment.

    With ``strict=False`` the schedule may be any alternation of radial and
    tangential zones; the result is then the expected cost of that policy.
    """
    if strict and schedule.case != cost.case:
        raise ValueError(f"schedule case {schedule.case} does not match cost case {cost.case}")
    if not math.isclose(schedule.R, cost.R):
        raise ValueError("schedule and cost disagree on R")
    R = cost.R
    edges, branch = _edges(schedule, R)
    specs = []
    for a, b in zip(edges, edges[1:]):
        if branch == RADIAL:
            if a == 0.0 and not cost.origin_growth.f_integrable:
                raise DivergentIntegral("radial branch at the origin with a non-integrable cost",
                                        sign=cost.sign)
            seed = 0.0 if a == 0.0 else -2.0 * a * cost(a)
        else:
            seed = math.nan
        specs.append((a, b, branch, seed))
        branch = TANGENTIAL if branch == RADIAL else RADIAL
    segments = []
    anchor = 0.0
    for a, b, br, seed in reversed(specs):
        seg = Segment(a, b, br, seed, anchor)
        segments.append(seg)
        anchor = _left_value(cost, seg)
    segments.reverse()
    return PiecewiseValue(cost, schedule, tuple(segments), anchor, frak_constants(cost, schedule))


def _left_value(cost, seg):
    if seg.a > 0.0:
        return float(_segment_value(cost, seg, seg.a))
    growth = cost.origin_growth
    if seg.branch == TANGENTIAL and not growth.sf_integrable:
        return math.inf * cost.sign
    return float(_segment_value(cost, seg, 0.0))


def _locate(v, r, side="left"):
    """Index of the segment owning r: (a, b] for the left side, [a, b) for the right."""
    segs = v.segments
    if not 0.0 <= r <= v.R * (1 + 1e-12):
        raise ValueError(f"radius {r} outside [0, {v.R}]")
    for i, s in enumerate(segs):
        if side == "left" and s.a < r <= s.b:
            return i
        if side == "right" and s.a <= r < s.b:
            return i
    return 0 if r == 0.0 else len(segs) - 1


def eval_value(v: PiecewiseValue, r):
    """V(r); accepts a scalar or an array of radii."""
    arr = np.asarray(r, dtype=float)
    out = np.array([_eval_scalar(v, x) for x in arr.ravel()])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _eval_scalar(v, r):
    if r == 0.0:
        if not math.isfinite(v.alpha_const):
            raise OriginValueInfinite("value at the origin is infinite", sign=int(np.sign(v.alpha_const)))
        return v.alpha_const
    seg = v.segments[_locate(v, r)]
    if r == seg.b:
        return seg.value_at_b
    return float(_segment_value(v.cost, seg, r))


def eval_derivative(v: PiecewiseValue, r, side="left"):
    """One-sided derivative V'(r-) or V'(r+)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    return _segment_slope(v, v.segments[_locate(v, r, side)], r, side)


def _segment_slope(v, seg, r, side):
    cost = v.cost
    if seg.branch == TANGENTIAL:
        if r == 0.0:
            return 0.0 if cost.is_bounded else -math.inf * cost.sign
        fr = cost.left_limit(r) if side == "left" else cost.right_limit(r)
        return -2.0 * r * fr
    F = cost.antiderivative
    return seg.seed_slope - 2.0 * (F(r) - F(seg.a))


def eval_second_derivative(v: PiecewiseValue, r, side="right"):
    """Analytic V'' (right derivative of V' on tangential segments)."""
    seg = v.segments[_locate(v, r, side)]
    fr = v.cost.left_limit(r) if side == "left" else v.cost.right_limit(r)
    if seg.branch == RADIAL:
        return -2.0 * fr
    return -2.0 * fr - 2.0 * r * v.cost.right_derivative(r)


def branch_at(v: PiecewiseValue, r):
    return v.segments[_locate(v, r)].branch


@dataclass(frozen=True)
class FitGap:
    point: float
    value_gap: float
    slope_gap: float


@dataclass(frozen=True)
class FitReport:
    gaps: tuple
    passed: bool

    def gap_at(self, point, tol=1e-9):
        return next(g for g in self.gaps if abs(g.point - point) <= tol * max(1.0, abs(point)))


def check_fit(v: PiecewiseValue, value_tol=1e-8, slope_tol=1e-6) -> FitReport:
    """Continuity and smooth-fit gaps at every switching radius and cost jump."""
    points = sorted(set(v.schedule.radii) | set(v.cost.jumps))
    gaps = []
    for p in points:
        left = v.segments[_locate(v, p, "left")]
        right = v.segments[_locate(v, p, "right")]
        dv = abs(float(_segment_value(v.cost, left, p)) - float(_segment_value(v.cost, right, p)))
        dd = abs(_segment_slope(v, left, p, "left") - _segment_slope(v, right, p, "right"))
        gaps.append(FitGap(p, dv, dd))
    ok = all(g.value_gap < value_tol and g.slope_gap < slope_tol for g in gaps)
    return FitReport(tuple(gaps), ok)


def tabulate(v: PiecewiseValue, grid, path=None):
    """Rows ``(r, V, dV_left, dV_right, branch)``; written as CSV when a path is given."""
    rows = []
    for r in np.asarray(grid, dtype=float):
        r = float(r)
        left = eval_derivative(v, r, "left") if r > 0 else eval_derivative(v, r, "right")
        right = eval_derivative(v, r, "right") if r < v.R else left
        rows.append((r, eval_value(v, r), left, right, branch_at(v, r) if r > 0 else v.segments[0].branch))
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "V", "dV_left", "dV_right", "branch"])
            for row in rows:
                w.writerow([repr(row[0]), repr(row[1]), repr(row[2]), repr(row[3]), row[4]])
    return rows


def value_grid(v: PiecewiseValue, n):
    """``n + 1`` equispaced radii on [0, R], dropping 0 when V(0) is infinite."""
    grid = np.linspace(0.0, v.R, n + 1)
    return grid if math.isfinite(v.alpha_const) else grid[1:]


# ---------------------------------------------------------------------------
# Closed-form route: explicit sums over switching radii, integrals by
# adaptive quadrature of f alone.


def _padded_points(schedule, R):
    """Alternating (s_0, r_1, s_1, ...) or (r_0, s_0, r_1, ...) closed off at R."""
    pts = [0.0, *schedule.radii, R]
    if len(pts) % 2 == 0:
        pts.append(R)
    return pts


def _q(fn, a, b, breaks):
    if a == b:
        return 0.0
    sgn = 1.0
    if b < a:
        a, b, sgn = b, a, -1.0
    inner = [x for x in breaks if a < x < b]
    val, _ = integrate.quad(fn, a, b, points=inner or None, epsabs=1e-13, epsrel=1e-12, limit=500)
    return sgn * val


class _Quadrature:
    def __init__(self, cost):
        self.cost = cost
        self.breaks = list(cost.jumps) + list(cost.breakpoints[1:-1])

    def f(self, a, b):
        return _q(lambda t: float(self.cost(t)), a, b, self.breaks)

    def sf(self, a, b):
        return _q(lambda t: t * float(self.cost(t)), a, b, self.breaks)

    def double(self, lo, hi, base):
        """int_lo^hi int_base^s f(t) dt ds."""
        if lo == hi:
            return 0.0
        return (hi - lo) * self.f(base, lo) + _q(lambda t: (hi - t) * float(self.cost(t)), lo, hi, self.breaks)

    def sfv(self, s):
        return 0.0 if s == 0.0 else s * float(self.cost(s))


def frak_constants(cost: RadialCost, schedule: SwitchingSchedule):
    """Tail sums over complete radial+tangential cells beyond cell i, i = 0..k.

    Each entry already carries the factor 2 of the value integrals, so it is
    added to the cell's own contribution with unit weight.
    """
    pts = _padded_points(schedule, cost.R)
    q = _Quadrature(cost)
    if schedule.case == "I":
        s = pts[0::2]
        r = [None] + pts[1::2]
    else:
        r = pts[0::2]
        s = pts[1::2]
    k = len(s) - 1
    term = []
    for j in range(1, k + 1):
        term.append(2.0 * ((r[j] - s[j - 1]) * q.sfv(s[j - 1])
                           + q.double(s[j - 1], r[j], s[j - 1]) + q.sf(r[j], s[j])))
    return tuple(float(sum(term[i:])) for i in range(k + 1))


def closed_form_value(cost: RadialCost, schedule: SwitchingSchedule, x):
    """Evaluate the explicit candidate formula at radius ``x`` by quadrature."""
    R = cost.R
    pts = _padded_points(schedule, R)
    q = _Quadrature(cost)
    frak = frak_constants(cost, schedule)
    if schedule.case == "I":
        s = pts[0::2]
        r = [None] + pts[1::2]
        K = len(s) - 1
        head = (-2.0 * q.sf(max(R, r[K]), s[K])
                - 2.0 * (r[K] - min(R, r[K])) * q.sfv(s[K - 1])
                - 2.0 * q.double(min(R, r[K]), r[K], s[K - 1]))
        for i in range(1, K + 1):
            if s[i - 1] < x <= s[i] or (x == 0.0 and i == 1):
                lo, hi = min(x, r[i]), max(x, r[i])
                return head + frak[i] + 2.0 * ((r[i] - lo) * q.sfv(s[i - 1])
                                               + q.double(lo, r[i], s[i - 1]) + q.sf(hi, s[i]))
    else:
        r = pts[0::2]
        s = pts[1::2]
        L = len(s) - 1
        head = (-2.0 * q.sf(min(R, s[L]), s[L])
                + 2.0 * (max(R, s[L]) - s[L]) * q.sfv(s[L])
                + 2.0 * q.double(s[L], max(R, s[L]), s[L]))
        for i in range(0, L + 1):
            if r[i] < x <= r[i + 1] or (x == 0.0 and i == 0):
                lo, hi = min(x, s[i]), max(x, s[i])
                return head + frak[i] + 2.0 * (q.sf(lo, s[i]) - (hi - s[i]) * q.sfv(s[i])
                                               - q.double(s[i], hi, s[i]))
    raise ValueError(f"radius {x} outside (0, {R}]")
