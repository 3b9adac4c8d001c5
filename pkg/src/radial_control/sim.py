"""Path simulation of the controlled radius up to exit from the ball.

A control is reduced to a piecewise-constant profile ``lam(r)`` in [0, 1].
``lam = 1`` is radial motion and ``lam = 0`` is tangential motion.  The
squared radius ``Z`` then follows ``dZ = dt + 2 lam sqrt(Z) dW``.  The
simulator advances it with the exact-in-law update

    Z' = (sqrt(Z) + lam dW)^2 + (1 - lam^2) h,

This is a reflected Brownian step when ``lam = 1``.  It is deterministic,
``Z + h``, when ``lam = 0``.  For every ``lam`` its mean increment is ``h``.

Running cost is integrated along each step from the cost antiderivatives:
exactly for tangential steps, and as the path average of ``f`` over the
swept radii for radial ones.  Exit during a step is detected with a
Brownian-bridge crossing test so that the exit time is not biased by
discrete monitoring.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .cost import RadialCost, antiderivative_f, antiderivative_sf, cost_value
from .errors import DivergentIntegral, PolicyError, PolicyUndefinedAtOrigin
from .rng import normal_pair, uniform
from .switching import SwitchingSchedule


class PolicyKind(str, enum.Enum):
    RADIAL = "radial"
    TANGENTIAL = "tangential"
    OPTIMAL = "optimal"
    CONSTANT_LAMBDA = "lambda"
    ORIGIN_DELTA = "delta"


@dataclass(frozen=True)
class ControlPolicy:
    kind: PolicyKind
    schedule: SwitchingSchedule | None = None
    lam: float | None = None
    delta: float | None = None
    inner: "ControlPolicy | None" = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.kind is PolicyKind.OPTIMAL and self.schedule is None:
            raise PolicyError("optimal policy needs a switching schedule")
        if self.kind is PolicyKind.CONSTANT_LAMBDA and not (self.lam is not None and 0 <= self.lam <= 1):
            raise PolicyError("lambda must lie in [0, 1]")
        if self.kind is PolicyKind.ORIGIN_DELTA:
            if self.inner is None or self.inner.kind is PolicyKind.ORIGIN_DELTA:
                raise PolicyError("origin wrapper needs a plain inner policy")
            if not (self.delta is not None and self.delta > 0):
                raise PolicyError("delta must be positive")

    @classmethod
    def radial(cls):
        return cls(PolicyKind.RADIAL)

    @classmethod
    def tangential(cls):
        return cls(PolicyKind.TANGENTIAL)

    @classmethod
    def optimal(cls, schedule):
        return cls(PolicyKind.OPTIMAL, schedule=schedule)

    @classmethod
    def constant_lambda(cls, lam):
        return cls(PolicyKind.CONSTANT_LAMBDA, lam=float(lam))

    @classmethod
    def origin_delta(cls, delta, inner):
        return cls(PolicyKind.ORIGIN_DELTA, delta=float(delta), inner=inner)

    @property
    def label(self):
        if self.kind is PolicyKind.CONSTANT_LAMBDA:
            return f"lambda={self.lam:g}"
        if self.kind is PolicyKind.ORIGIN_DELTA:
            return f"{self.inner.label}+delta={self.delta:g}"
        return self.kind.value

    def profile(self, R):
        """``(edges, values)``: lam equals ``values[k]`` on ``[edges[k], edges[k+1])``."""
        k = self.kind
        if k is PolicyKind.RADIAL:
            edges, vals = [0.0], [1.0]
        elif k is PolicyKind.TANGENTIAL:
            edges, vals = [0.0], [0.0]
        elif k is PolicyKind.CONSTANT_LAMBDA:
            edges, vals = [0.0], [self.lam]
        elif k is PolicyKind.OPTIMAL:
            radial_first = self.schedule.case == "I"
            edges = [0.0, *self.schedule.radii]
            vals = [float((i % 2 == 0) == radial_first) for i in range(len(edges))]
        else:
            inner_edges, inner_vals = self.inner.profile(R)
            idx = np.searchsorted(inner_edges, self.delta, side="right") - 1
            edges = [0.0, self.delta] + [e for e in inner_edges if e > self.delta]
            vals = [1.0, inner_vals[idx]] + [v for e, v in zip(inner_edges, inner_vals) if e > self.delta]
        # merge neighbours with equal lam
        keep_e, keep_v = [edges[0]], [vals[0]]
        for e, v in zip(edges[1:], vals[1:]):
            if v != keep_v[-1]:
                keep_e.append(e)
                keep_v.append(v)
        return np.array(keep_e, dtype=float), np.array(keep_v, dtype=float)

    def lam_at(self, r, R):
        edges, vals = self.profile(R)
        return float(vals[np.searchsorted(edges, r, side="right") - 1])

    def to_dict(self):
        d = {"kind": self.kind.value}
        if self.lam is not None:
            d["lambda"] = self.lam
        if self.delta is not None:
            d["delta"] = self.delta
            d["inner"] = self.inner.to_dict()
        if self.schedule is not None:
            d["schedule"] = self.schedule.to_dict()
        return d


def parse_policy(text, schedule=None, delta=None):
    """Policy from a command-line name: optimal, radial, tangential or lambda=<v>."""
    text = text.strip().lower()
    if text == "optimal":
        policy = ControlPolicy.optimal(schedule)
    elif text == "radial":
        policy = ControlPolicy.radial()
    elif text == "tangential":
        policy = ControlPolicy.tangential()
    elif text.startswith("lambda="):
        try:
            lam = float(text.split("=", 1)[1])
        except ValueError:
            raise PolicyError(f"bad lambda in {text!r}") from None
        policy = ControlPolicy.constant_lambda(lam)
    else:
        raise PolicyError(f"unknown policy {text!r}")
    return ControlPolicy.origin_delta(delta, policy) if delta is not None else policy


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    seed: int = 0
    n_paths: int = 100_000
    max_time: float | None = None  # defaults to 10 R^2

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_paths < 1:
            raise ValueError("need at least one path")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.max_time is not None and not (0 < self.max_time < math.inf):
            raise ValueError("max_time must be positive and finite")

    def horizon(self, R):
        return self.max_time if self.max_time is not None else 10.0 * R * R


@dataclass
class Trace:
    t: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None

    def regime_names(self):
        return ["radial" if v == 1.0 else "tangential" if v == 0.0 else f"lambda={v:g}" for v in self.lam]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "Z", "regime"])
            for t, z, name in zip(self.t, self.z, self.regime_names()):
                w.writerow([repr(float(t)), repr(float(z)), name])

    def write_positions_csv(self, path):
        if self.x1 is None:
            raise ValueError("trace has no planar positions")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x1", "x2"])
            for row in zip(self.t, self.x1, self.x2):
                w.writerow([repr(float(v)) for v in row])


@dataclass
class PathResult:
    exit_time: float
    accumulated_cost: float
    hit_cap: bool
    trace: Trace | None = None


@dataclass
class PathBatch:
    """Per-path outcomes for paths ``first .. first + n - 1``."""

    first: int
    exit_time: np.ndarray
    cost: np.ndarray
    hit_cap: np.ndarray
    obs_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    obs_z: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    obs_cost: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def step_z(z, regime, dW, dt, scheme="euler"):
    """One step of the squared radius.

    ``regime`` is "radial", "tangential" or a number lam in [0, 1].
    ``scheme="euler"`` is ``z + dt + 2 lam sqrt(z) dW`` clamped at 0, and the
    radial step from ``z = 0`` lands on ``dt``.  ``scheme="exact"`` is the
    update the simulator uses, ``(sqrt(z) + lam dW)^2 + (1 - lam^2) dt``.
    """
    if z < 0:
        raise ValueError("squared radius must be non-negative")
    lam = {"radial": 1.0, "tangential": 0.0}.get(regime, regime)
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if lam == 0.0:
        return z + dt
    if scheme == "euler":
        return max(z + dt + 2.0 * lam * math.sqrt(z) * dW, 0.0) if z > 0 else dt
    if scheme == "exact":
        y = math.sqrt(z) + lam * dW
        return y * y + (1.0 - lam * lam) * dt
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# numba kernel


@nb.njit(cache=True, inline="always")
def _interval(edges, r):
    k = 0
    while k + 1 < edges.size and edges[k + 1] <= r:
        k += 1
    return k


@nb.njit(cache=True, inline="always")
def _mean_cost(code, par, bps, cf, cum, r0, r1, via_origin):
    """Average of f over the radii swept when moving from r0 to r1."""
    if via_origin:
        span = r0 + r1
        if span <= 0.0:
            return cost_value(code, par, bps, cf, 0.0)
        F0 = antiderivative_f(code, par, bps, cf, cum, 0.0)
        return (antiderivative_f(code, par, bps, cf, cum, r0) - F0
                + antiderivative_f(code, par, bps, cf, cum, r1) - F0) / span
    d = r1 - r0
    if abs(d) <= 1e-13 * (r0 + r1):
        return cost_value(code, par, bps, cf, 0.5 * (r0 + r1))
    return (antiderivative_f(code, par, bps, cf, cum, r1) - antiderivative_f(code, par, bps, cf, cum, r0)) / d


ZONE_STEPS = 20.0


# Reference counting is disabled in the kernels: nothing is allocated inside,
# and the per-call array refcounts otherwise dominate the step cost.
@nb.njit(cache=True, nogil=True, _nrt=False)
def _run_path(code, par, bps, cf, cum, R, edges, vals, x0, dt, horizon, seed, path,
              jump, obs_t, obs_z, obs_cost, trace, planar):
    """Simulate one path.  Returns (exit_time, cost, hit_cap, n_trace).

    ``obs_z``/``obs_cost`` receive the stopped state at each ``obs_t``.  When
    ``trace`` has rows, row i holds (t, Z, lam, x1, x2) after step i.
    """
    r = x0
    z = x0 * x0
    t = 0.0
    acc = 0.0
    # Z along a tangential stretch is z_entry + (t - t_entry), exactly.
    in_tang = False
    z_entry = 0.0
    t_entry = 0.0
    n_radial = 0  # counter driving the Brownian increments
    n_tang = 0
    cached = -1
    g0 = 0.0
    g1 = 0.0
    m = 0
    n_obs = obs_t.size
    cap = trace.shape[0]
    n_tr = 0
    theta = 0.0
    a1 = 0.0
    a2 = 0.0
    exited = False
    hit = False
    sqrt_dt = math.sqrt(dt)
    if cap > 0:
        trace[0, 0] = 0.0
        trace[0, 1] = z
        k0 = _interval(edges, r)
        trace[0, 2] = vals[k0]
        trace[0, 3] = r
        trace[0, 4] = 0.0
        n_tr = 1
    while True:
        if t >= horizon:
            hit = True
            break
        k = _interval(edges, r)
        lam = vals[k]
        limit = horizon - t
        snap_obs = False
        if m < n_obs and obs_t[m] - t <= limit:
            limit = obs_t[m] - t
            snap_obs = True
        if lam == 0.0:
            if not in_tang:
                in_tang = True
                z_entry = z
                t_entry = t
            target = edges[k + 1] if k + 1 < edges.size else R
            if target > R:
                target = R
            h = target * target - r * r
            reach = True
            if not jump and h > dt:
                h = dt
                reach = False
            if h >= limit:
                h = limit
                reach = False
            else:
                snap_obs = False
            t1 = obs_t[m] if snap_obs else t + h
            z = target * target if reach else z_entry + (t1 - t_entry)
            r1 = target if reach else math.sqrt(z)
            acc += 2.0 * (antiderivative_sf(code, par, bps, cf, cum, r1)
                          - antiderivative_sf(code, par, bps, cf, cum, r))
            if planar and r1 > 0.0:
                if n_tang % 2 == 0:
                    a1, a2, _ = normal_pair(seed, path, (n_tang // 2) | (1 << 62))
                theta += (a1 if n_tang % 2 == 0 else a2) * math.sqrt(h) / (0.5 * (r + r1))
            n_tang += 1
            t = t1
            r = r1
            if reach and target >= R:
                exited = True
        else:
            in_tang = False
            # The exit radius, or the edge of a tangential zone: once reached,
            # the radius never comes back into this zone.
            b = R
            if k + 1 < edges.size and vals[k + 1] == 0.0:
                b = edges[k + 1]
            h = dt
            # resolve zones narrower than a typical increment
            w = (b - edges[k]) / ZONE_STEPS
            if w * w < h:
                h = w * w
            if h >= limit:
                h = limit
            else:
                snap_obs = False
            pair = n_radial >> 1
            if pair != cached:
                g0, g1, _ = normal_pair(seed, path, pair)
                cached = pair
            g = g0 if (n_radial & 1) == 0 else g1
            sh = sqrt_dt if h == dt else math.sqrt(h)
            dw = g * sh
            y = r + lam * dw
            if lam == 1.0:
                r1 = abs(y)
            else:
                r1 = math.sqrt(y * y + (1.0 - lam * lam) * h)
            via = y < 0.0
            if r1 >= b:
                if via:
                    frac = (r + b) / (r + r1)
                else:
                    frac = (b - r) / (r1 - r) if r1 > r else 1.0
                acc += frac * h * _mean_cost(code, par, bps, cf, cum, r, b, via)
                t += frac * h
                snap_obs = False
                exited = b >= R
                r = b
            else:
                gap = (b - r) * (b - r1)
                var = lam * lam * h
                if gap < 18.0 * var and uniform(seed, path, n_radial, 1) < math.exp(-2.0 * gap / var):
                    acc += 0.5 * h * _mean_cost(code, par, bps, cf, cum, r, b, False)
                    t += 0.5 * h
                    snap_obs = False
                    exited = b >= R
                    r = b
                else:
                    acc += h * _mean_cost(code, par, bps, cf, cum, r, r1, via)
                    t = obs_t[m] if snap_obs else t + h
                    if planar:
                        if via:
                            theta += math.pi
                        if lam < 1.0 and r + r1 > 0.0:
                            theta += math.sqrt(1.0 - lam * lam) * dw / (0.5 * (r + r1))
                    r = r1
            z = r * r
            n_radial += 1
        if n_tr < cap:
            trace[n_tr, 0] = t
            trace[n_tr, 1] = z
            trace[n_tr, 2] = lam
            trace[n_tr, 3] = r * math.cos(theta)
            trace[n_tr, 4] = r * math.sin(theta)
            n_tr += 1
        if exited:
            break
        if snap_obs:
            obs_z[m] = z
            obs_cost[m] = acc
            m += 1
    while m < n_obs:
        obs_z[m] = z
        obs_cost[m] = acc
        m += 1
    return t, acc, hit, n_tr


@nb.njit(cache=True, nogil=True, _nrt=False)
def _run_batch(code, par, bps, cf, cum, R, edges, vals, x0, dt, horizon, seed, first, count,
               obs_t, out_t, out_cost, out_cap, out_obs_z, out_obs_cost, empty):
    for i in range(count):
        t, acc, hit, _ = _run_path(code, par, bps, cf, cum, R, edges, vals, x0, dt, horizon, seed,
                                   first + np.uint64(i), True, obs_t, out_obs_z[i], out_obs_cost[i], empty, False)
        out_t[i] = t
        out_cost[i] = acc
        out_cap[i] = hit


# ---------------------------------------------------------------------------


def validate(cost: RadialCost, policy: ControlPolicy, x0: float):
    """Raise if the policy cannot be simulated for this cost and start."""
    R = cost.R
    if not 0.0 <= x0 < R:
        raise ValueError(f"x0 must lie in [0, {R})")
    if policy.kind is PolicyKind.ORIGIN_DELTA:
        if not policy.delta < cost.eta:
            raise PolicyError(f"delta must lie in (0, {cost.eta:g}) for this cost")
        base = policy.inner
    else:
        base = policy
    if base.kind is PolicyKind.OPTIMAL:
        if base.schedule.case != cost.case or not math.isclose(base.schedule.R, R):
            raise PolicyError("schedule does not belong to this cost")
    edges, vals = policy.profile(R)
    if x0 == 0.0 and vals[0] == 0.0:
        raise PolicyUndefinedAtOrigin("tangential motion is undefined at the origin; wrap it with a delta policy")
    if vals[0] > 0.0 and not cost.origin_growth.f_integrable:
        raise DivergentIntegral("paths through the origin accumulate infinite cost", sign=cost.sign)
    return edges, vals


def simulate_path(cost: RadialCost, policy: ControlPolicy, x0: float, cfg: SimConfig,
                  path_index: int = 0, trace: bool = False, planar: bool = False,
                  max_trace: int = 5_000_000) -> PathResult:
    """Simulate a single path; with ``trace`` every time step is recorded."""
    edges, vals = validate(cost, policy, x0)
    if planar and cost.dimension != 2:
        raise ValueError("planar traces are only available in dimension 2")
    horizon = cfg.horizon(cost.R)
    rows = 0
    if trace or planar:
        rows = min(int(math.ceil(horizon / cfg.dt)) + 2, max_trace)
    buf = np.zeros((rows, 5))
    code, par, bps, cf, cum = cost.packed
    t, acc, hit, n = _run_path(code, par, bps, cf, cum, cost.R, edges, vals, float(x0), cfg.dt, horizon,
                               np.uint64(cfg.seed), np.uint64(path_index), not (trace or planar),
                               np.zeros(0), np.zeros(0), np.zeros(0), buf, planar)
    tr = None
    if rows:
        b = buf[:n]
        tr = Trace(b[:, 0].copy(), b[:, 1].copy(), b[:, 2].copy(),
                   b[:, 3].copy() if planar else None, b[:, 4].copy() if planar else None)
    return PathResult(t, acc, bool(hit), tr)


def simulate_paths(cost: RadialCost, policy: ControlPolicy, x0: float, cfg: SimConfig,
                   first: int = 0, count: int | None = None, observe=()) -> PathBatch:
    """Simulate paths ``first .. first + count - 1`` (default: all of ``cfg.n_paths``)."""
    edges, vals = validate(cost, policy, x0)
    count = cfg.n_paths if count is None else count
    obs_t = np.asarray(sorted(observe), dtype=float)
    out_t = np.empty(count)
    out_cost = np.empty(count)
    out_cap = np.zeros(count, dtype=np.bool_)
    oz = np.empty((count, obs_t.size))
    oc = np.empty((count, obs_t.size))
    code, par, bps, cf, cum = cost.packed
    _run_batch(code, par, bps, cf, cum, cost.R, edges, vals, float(x0), cfg.dt, cfg.horizon(cost.R),
               np.uint64(cfg.seed), np.uint64(first), count, obs_t, out_t, out_cost, out_cap, oz, oc,
               np.zeros((0, 5)))
    return PathBatch(first, out_t, out_cost, out_cap, obs_t, oz, oc)
