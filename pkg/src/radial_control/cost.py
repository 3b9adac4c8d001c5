"""Radially symmetric running costs and their exact calculus.

A cost is a function ``f(r)`` of the radius on ``[0, R]``.  Every supported
family has closed-form antiderivatives

    F(r) = int f(s) ds          G(r) = int s f(s) ds

which the switching solver, the value construction and the path simulator
all share through the numba kernels below.  For singular power laws the
antiderivatives are anchored so that ``F(0)`` / ``G(0)`` may be infinite;
differences between positive radii are always finite.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import CostSpecError, DivergentIntegral, EvalAtSingularOrigin

# Kernel codes for the cost families.
STEP_DECREASING = 0
STEP_INCREASING = 1
SINUSOID = 2
POWER = 3
POLYNOMIAL = 4


class Kind(str, enum.Enum):
    STEP_DECREASING = "step_decreasing"
    STEP_INCREASING = "step_increasing"
    SINUSOID = "sin"
    POWER = "power"
    POLYNOMIAL = "piecewise_poly"


_KIND_CODE = {
    Kind.STEP_DECREASING: STEP_DECREASING,
    Kind.STEP_INCREASING: STEP_INCREASING,
    Kind.SINUSOID: SINUSOID,
    Kind.POWER: POWER,
    Kind.POLYNOMIAL: POLYNOMIAL,
}


class Growth(str, enum.Enum):
    """Integrability class of the cost at the origin."""

    BOUNDED = "Bounded"
    INTEGRABLE_F = "IntegrableF"
    INTEGRABLE_SF_ONLY = "IntegrableSFOnly"
    NON_INTEGRABLE_SF = "NonIntegrableSF"
    NEGATIVE_NON_INTEGRABLE = "NegativeNonIntegrable"

    @property
    def f_integrable(self):
        return self in (Growth.BOUNDED, Growth.INTEGRABLE_F)

    @property
    def sf_integrable(self):
        return self in (Growth.BOUNDED, Growth.INTEGRABLE_F, Growth.INTEGRABLE_SF_ONLY)


class Monotone(str, enum.Enum):
    INCREASING = "IncreasingNearZero"
    DECREASING = "DecreasingNearZero"


# ---------------------------------------------------------------------------
# numba kernels.  ``par`` = [rho, alpha, sign, R]; ``bps`` are the polynomial
# breakpoints, ``cf`` the per-piece coefficients in powers of (r - bps[k]),
# and ``cum`` holds F and G at each breakpoint (rows 0 and 1).


@nb.njit(cache=True, inline="always")
def _piece(bps, r):
    # index k of the piece with bps[k] <= r < bps[k + 1], clipped to valid pieces
    lo = 0
    hi = bps.size - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bps[mid] <= r:
            lo = mid
        else:
            hi = mid - 1
    return lo


@nb.njit(cache=True, inline="always")
def _poly(c, u):
    acc = 0.0
    for j in range(c.size - 1, -1, -1):
        acc = acc * u + c[j]
    return acc


@nb.njit(cache=True, inline="always")
def _poly_slope(c, u):
    acc = 0.0
    for j in range(c.size - 1, 0, -1):
        acc = acc * u + j * c[j]
    return acc


@nb.njit(cache=True, inline="always")
def _poly_F(c, u):
    acc = 0.0
    for j in range(c.size - 1, -1, -1):
        acc = acc * u + c[j] / (j + 1)
    return acc * u


@nb.njit(cache=True, inline="always")
def _poly_G(c, b, u):
    # int_0^u (b + t) p(t) dt
    acc = 0.0
    for j in range(c.size - 1, -1, -1):
        acc = acc * u + c[j] / (j + 2)
    return acc * u * u + b * _poly_F(c, u)


@nb.njit(cache=True, inline="always")
def cost_value(code, par, bps, cf, r):
    """f(r), right-continuous at jumps."""
    if code == STEP_DECREASING:
        return 0.0 if r <= par[0] else -1.0
    if code == STEP_INCREASING:
        return -1.0 if r < par[0] else 0.0
    if code == SINUSOID:
        return math.sin(r)
    if code == POWER:
        if r == 0.0:
            return par[2] * math.inf
        return par[2] * r ** (-par[1])
    k = _piece(bps, r)
    return _poly(cf[k], r - bps[k])


@nb.njit(cache=True, inline="always")
def cost_left_value(code, par, bps, cf, r):
    """Left limit f(r-)."""
    if code == STEP_DECREASING:
        return 0.0 if r <= par[0] else -1.0
    if code == STEP_INCREASING:
        return -1.0 if r <= par[0] else 0.0
    if code == POLYNOMIAL:
        k = _piece(bps, r)
        if k > 0 and bps[k] == r:
            k -= 1
        return _poly(cf[k], r - bps[k])
    return cost_value(code, par, bps, cf, r)


@nb.njit(cache=True, inline="always")
def cost_right_value(code, par, bps, cf, r):
    """Right limit f(r+)."""
    if code == STEP_DECREASING:
        return 0.0 if r < par[0] else -1.0
    return cost_value(code, par, bps, cf, r)


@nb.njit(cache=True, inline="always")
def cost_slope(code, par, bps, cf, r):
    """Right derivative of f."""
    if code == STEP_DECREASING:
        return -math.inf if r == par[0] else 0.0
    if code == STEP_INCREASING:
        return 0.0
    if code == SINUSOID:
        return math.cos(r)
    if code == POWER:
        return -par[2] * par[1] * r ** (-par[1] - 1.0)
    k = _piece(bps, r)
    return _poly_slope(cf[k], r - bps[k])


@nb.njit(cache=True, inline="always")
def antiderivative_f(code, par, bps, cf, cum, r):
    if code == STEP_DECREASING:
        return -max(r - par[0], 0.0)
    if code == STEP_INCREASING:
        return -min(r, par[0])
    if code == SINUSOID:
        return 1.0 - math.cos(r)
    if code == POWER:
        a = par[1]
        if a == 1.0:
            return par[2] * math.log(r) if r > 0.0 else -par[2] * math.inf
        if r == 0.0:
            return 0.0 if a < 1.0 else -par[2] * math.inf
        return par[2] * r ** (1.0 - a) / (1.0 - a)
    k = _piece(bps, r)
    return cum[0, k] + _poly_F(cf[k], r - bps[k])


@nb.njit(cache=True, inline="always")
def antiderivative_sf(code, par, bps, cf, cum, r):
    if code == STEP_DECREASING:
        m = max(r, par[0])
        return -0.5 * (m * m - par[0] * par[0])
    if code == STEP_INCREASING:
        m = min(r, par[0])
        return -0.5 * m * m
    if code == SINUSOID:
        return math.sin(r) - r * math.cos(r)
    if code == POWER:
        a = par[1]
        if a == 2.0:
            return par[2] * math.log(r) if r > 0.0 else -par[2] * math.inf
        if r == 0.0:
            return 0.0 if a < 2.0 else -par[2] * math.inf
        return par[2] * r ** (2.0 - a) / (2.0 - a)
    k = _piece(bps, r)
    return cum[1, k] + _poly_G(cf[k], bps[k], r - bps[k])


@nb.njit(cache=True)
def _map(which, code, par, bps, cf, cum, rs):
    out = np.empty(rs.size)
    for i in range(rs.size):
        r = rs[i]
        if which == 0:
            out[i] = cost_value(code, par, bps, cf, r)
        elif which == 1:
            out[i] = cost_left_value(code, par, bps, cf, r)
        elif which == 2:
            out[i] = cost_right_value(code, par, bps, cf, r)
        elif which == 3:
            out[i] = cost_slope(code, par, bps, cf, r)
        elif which == 4:
            out[i] = antiderivative_f(code, par, bps, cf, cum, r)
        else:
            out[i] = antiderivative_sf(code, par, bps, cf, cum, r)
    return out


# ---------------------------------------------------------------------------
# adaptive Simpson


def adaptive_simpson(fn, a, b, tol=1e-10, max_depth=50):
    """Integrate a scalar function on [a, b] by adaptive Simpson's rule.

    Uses an explicit stack and Richardson-corrected panel estimates.  Both
    endpoints are evaluated, so callers must keep singular points out of
    ``[a, b]``.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(fn, b, a, tol, max_depth)
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fn(lm), fn(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total


# ---------------------------------------------------------------------------


def _growth_for_power(alpha, sign):
    if sign > 0:
        if alpha < 1:
            return Growth.INTEGRABLE_F
        if alpha < 2:
            return Growth.INTEGRABLE_SF_ONLY
        return Growth.NON_INTEGRABLE_SF
    if alpha < 1:
        return Growth.INTEGRABLE_F
    return Growth.NEGATIVE_NON_INTEGRABLE


@dataclass(frozen=True)
class RadialCost:
    """A running cost ``f(|x|)`` on the ball of radius ``R`` in dimension ``d``.

    Build instances with the classmethod constructors or :meth:`from_dict`.
    ``eta`` is a radius below which ``f`` is monotone in the declared
    direction.
    """

    kind: Kind
    R: float = 1.0
    dimension: int = 2
    rho: float | None = None
    alpha: float | None = None
    sign: int = 1
    breakpoints: tuple = ()
    coeffs: tuple = ()
    origin_growth: Growth | None = None
    origin_monotone: Monotone | None = None
    eta: float | None = None
    _packed: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        try:
            set_("kind", Kind(self.kind))
        except ValueError:
            raise CostSpecError(f"unknown cost kind {self.kind!r}") from None
        if not (self.R > 0 and math.isfinite(self.R)):
            raise CostSpecError("R must be positive and finite")
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise CostSpecError("dimension must be an integer >= 2")
        set_("dimension", int(self.dimension))
        if self.sign not in (1, -1):
            raise CostSpecError("sign must be +1 or -1")
        set_("sign", int(self.sign))
        growth, monotone, eta = self._infer_defaults()
        if self.origin_growth is None:
            set_("origin_growth", growth)
        if self.origin_monotone is None:
            set_("origin_monotone", monotone)
        try:
            set_("origin_growth", Growth(self.origin_growth))
            set_("origin_monotone", Monotone(self.origin_monotone))
        except ValueError as exc:
            raise CostSpecError(str(exc)) from None
        if self.eta is None:
            set_("eta", eta)
        if not 0 < self.eta <= self.R:
            raise CostSpecError("eta must lie in (0, R]")
        if self.origin_growth is not growth:
            raise CostSpecError(
                f"declared origin_growth {self.origin_growth.value} does not match "
                f"{growth.value} implied by the {self.kind.value} cost"
            )
        if self.kind is not Kind.POLYNOMIAL and self.origin_monotone is not monotone:
            raise CostSpecError(
                f"declared origin_monotone {self.origin_monotone.value} contradicts "
                f"the {self.kind.value} cost"
            )
        set_("_packed", self._pack())

    # -- construction helpers ------------------------------------------------

    @classmethod
    def step_decreasing(cls, rho, R=1.0, dimension=2, **kw):
        return cls(Kind.STEP_DECREASING, R=R, dimension=dimension, rho=rho, **kw)

    @classmethod
    def step_increasing(cls, rho, R=1.0, dimension=2, **kw):
        return cls(Kind.STEP_INCREASING, R=R, dimension=dimension, rho=rho, **kw)

    @classmethod
    def sinusoid(cls, R=6.0, dimension=2, **kw):
        return cls(Kind.SINUSOID, R=R, dimension=dimension, **kw)

    @classmethod
    def power(cls, alpha, sign=1, R=1.0, dimension=2, **kw):
        return cls(Kind.POWER, R=R, dimension=dimension, alpha=alpha, sign=sign, **kw)

    @classmethod
    def polynomial(cls, breakpoints, coeffs, dimension=2, **kw):
        bps = tuple(float(b) for b in breakpoints)
        return cls(Kind.POLYNOMIAL, R=bps[-1], dimension=dimension,
                   breakpoints=bps, coeffs=tuple(tuple(map(float, c)) for c in coeffs), **kw)

    @classmethod
    def constant(cls, c, R=1.0, dimension=2):
        return cls.polynomial([0.0, R], [[c]], dimension=dimension)

    def _infer_defaults(self):
        R = self.R
        if self.kind in (Kind.STEP_DECREASING, Kind.STEP_INCREASING):
            if self.rho is None or not 0 < self.rho < R:
                raise CostSpecError("step costs need rho in (0, R)")
            mono = Monotone.DECREASING if self.kind is Kind.STEP_DECREASING else Monotone.INCREASING
            return Growth.BOUNDED, mono, float(self.rho)
        if self.kind is Kind.SINUSOID:
            return Growth.BOUNDED, Monotone.INCREASING, min(math.pi / 2, R)
        if self.kind is Kind.POWER:
            if self.alpha is None or not self.alpha > 0:
                raise CostSpecError("power cost needs alpha > 0")
            if self.sign not in (1, -1):
                raise CostSpecError("power cost sign must be +1 or -1")
            mono = Monotone.DECREASING if self.sign > 0 else Monotone.INCREASING
            return _growth_for_power(self.alpha, self.sign), mono, R
        return Growth.BOUNDED, *self._polynomial_shape()

    def _polynomial_shape(self):
        bps = np.asarray(self.breakpoints, float)
        if bps.ndim != 1 or bps.size < 2 or len(self.coeffs) != bps.size - 1:
            raise CostSpecError("piecewise_poly needs n+1 breakpoints and n coefficient rows")
        if bps[0] != 0.0 or not np.all(np.diff(bps) > 0) or not math.isclose(bps[-1], self.R):
            raise CostSpecError("breakpoints must increase from 0 to R")
        if any(len(c) == 0 for c in self.coeffs):
            raise CostSpecError("empty coefficient row")
        scale = max(1.0, max(abs(x) for c in self.coeffs for x in c))
        for k in range(1, bps.size - 1):
            left = sum(c * (bps[k] - bps[k - 1]) ** j for j, c in enumerate(self.coeffs[k - 1]))
            if abs(left - self.coeffs[k][0]) > 1e-9 * scale:
                raise CostSpecError(f"piecewise_poly is discontinuous at r={bps[k]}")
        # Direction near the origin from the first non-flat piece.
        for k, c in enumerate(self.coeffs):
            slope = next((x for x in c[1:] if x != 0.0), 0.0)
            if slope != 0.0:
                mono = Monotone.INCREASING if slope > 0 else Monotone.DECREASING
                deriv = [j * c[j] for j in range(1, len(c))]
                while len(deriv) > 1 and abs(deriv[-1]) <= 1e-14 * max(abs(x) for x in deriv):
                    deriv.pop()
                roots = [z.real for z in np.roots(deriv[::-1])
                         if abs(z.imag) < 1e-12 and 0 < z.real < bps[k + 1] - bps[k]]
                eta = bps[k] + min(roots) if roots else bps[k + 1]
                return mono, float(eta)
        return Monotone.INCREASING, float(self.R)

    def _pack(self):
        code = _KIND_CODE[self.kind]
        par = np.array([self.rho or 0.0, self.alpha or 0.0, float(self.sign), self.R])
        if self.kind is Kind.POLYNOMIAL:
            bps = np.asarray(self.breakpoints, float)
            width = max(len(c) for c in self.coeffs)
            cf = np.zeros((len(self.coeffs), width))
            for k, c in enumerate(self.coeffs):
                cf[k, : len(c)] = c
            cum = np.zeros((2, bps.size))
            for k in range(bps.size - 1):
                u = bps[k + 1] - bps[k]
                cum[0, k + 1] = cum[0, k] + _poly_F(cf[k], u)
                cum[1, k + 1] = cum[1, k] + _poly_G(cf[k], bps[k], u)
        else:
            bps = np.zeros(2)
            cf = np.zeros((1, 1))
            cum = np.zeros((2, 2))
        return code, par, bps, cf, cum

    @property
    def packed(self):
        """Arguments for the numba kernels: (code, par, bps, cf, cum)."""
        return self._packed

    # -- properties ------------------------------------------------------------

    @property
    def is_step(self):
        return self.kind in (Kind.STEP_DECREASING, Kind.STEP_INCREASING)

    @property
    def is_bounded(self):
        return self.origin_growth is Growth.BOUNDED

    @property
    def jumps(self):
        """Radii where f is discontinuous."""
        return (float(self.rho),) if self.is_step else ()

    @property
    def case(self):
        return "I" if self.origin_monotone is Monotone.INCREASING else "II"

    # -- evaluation ------------------------------------------------------------

    def _apply(self, which, r, allow_origin):
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.R * (1 + 1e-12)):
            raise ValueError(f"radius outside [0, {self.R}]")
        if not allow_origin and not self.is_bounded and np.any(arr == 0):
            raise EvalAtSingularOrigin("cost is unbounded at the origin")
        code, par, bps, cf, cum = self._packed
        out = _map(which, code, par, bps, cf, cum, np.ascontiguousarray(arr.ravel()))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def __call__(self, r):
        return self._apply(0, r, False)

    eval = __call__

    def left_limit(self, r):
        return self._apply(1, r, False)

    def right_limit(self, r):
        return self._apply(2, r, False)

    def right_derivative(self, r):
        return self._apply(3, r, False)

    def antiderivative(self, r):
        """F(r); infinite at 0 when f is not integrable there."""
        return self._apply(4, r, True)

    def moment_antiderivative(self, r):
        """G(r) with G' = s f(s)."""
        return self._apply(5, r, True)

    def _check_interval(self, a, b, finite):
        if not 0 <= a <= b <= self.R * (1 + 1e-12):
            raise ValueError("need 0 <= a <= b <= R")
        if a == 0 and b > 0 and not finite:
            raise DivergentIntegral("integral diverges at the origin",
                                    sign=int(np.sign(self.sign)))

    def integral_f(self, a, b):
        self._check_interval(a, b, self.origin_growth.f_integrable)
        return self.antiderivative(b) - self.antiderivative(a)

    def integral_sf(self, a, b):
        self._check_interval(a, b, self.origin_growth.sf_integrable)
        return self.moment_antiderivative(b) - self.moment_antiderivative(a)

    def quad_f(self, a, b, tol=1e-10):
        """Adaptive-Simpson value of the integral of f over [a, b]."""
        return self._quad(lambda s: self(s), a, b, tol)

    def quad_sf(self, a, b, tol=1e-10):
        return self._quad(lambda s: s * self(s), a, b, tol)

    def _quad(self, fn, a, b, tol):
        cuts = [a] + [x for x in self.jumps + tuple(self.breakpoints[1:-1]) if a < x < b] + [b]
        return sum(adaptive_simpson(fn, lo, hi, tol / len(cuts)) for lo, hi in zip(cuts, cuts[1:]))

    # -- serialization -----------------------------------------------------------

    def to_dict(self):
        d = {"kind": self.kind.value, "R": self.R, "dimension": self.dimension}
        if self.is_step:
            d["rho"] = self.rho
        if self.kind is Kind.POWER:
            d.update(alpha=self.alpha, sign=self.sign)
        if self.kind is Kind.POLYNOMIAL:
            d.update(breakpoints=list(self.breakpoints), coeffs=[list(c) for c in self.coeffs])
        d.update(origin_growth=self.origin_growth.value,
                 origin_monotone=self.origin_monotone.value, eta=self.eta)
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise CostSpecError("cost spec must be an object with a 'kind'")
        known = {"kind", "R", "dimension", "rho", "alpha", "sign", "breakpoints", "coeffs",
                 "origin_growth", "origin_monotone", "eta"}
        extra = set(d) - known
        if extra:
            raise CostSpecError(f"unknown cost fields: {sorted(extra)}")
        kw = dict(d)
        kind = kw.pop("kind")
        if kind == Kind.POLYNOMIAL.value:
            bps = [float(b) for b in kw.pop("breakpoints", [])]
            R = float(kw.pop("R", bps[-1] if bps else 1.0))
            if bps and bps[0] != 0.0:
                bps = [0.0] + bps
            if bps and bps[-1] < R:
                bps = bps + [R]
            if not bps:
                bps = [0.0, R]
            kw["breakpoints"] = tuple(bps)
            kw["R"] = R
            kw["coeffs"] = tuple(tuple(float(x) for x in c) for c in kw.get("coeffs", ()))
        try:
            return cls(kind, **kw)
        except TypeError as exc:
            raise CostSpecError(str(exc)) from None

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CostSpecError(f"cannot read cost spec {path}: {exc}") from None
        return cls.from_dict(spec)
