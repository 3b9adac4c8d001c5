"""Monte Carlo cost estimates and analytic expected costs of simple policies."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .cost import RadialCost
from .errors import RadialControlError
from .sim import ControlPolicy, PathBatch, PolicyKind, SimConfig, simulate_paths
from .switching import SwitchingSchedule, build_schedule
from .value import build_value, eval_value

BIAS_ALLOWANCE = 5e-3
CHUNK = 4096


@dataclass(frozen=True)
class CostEstimate:
    policy: str
    mean: float
    std_error: float
    n_paths: int
    capped_fraction: float

    @property
    def ci95_halfwidth(self):
        return 1.96 * self.std_error

    def to_dict(self):
        return {"policy": self.policy, "mean": self.mean, "se": self.std_error,
                "n": self.n_paths, "capped_fraction": self.capped_fraction}

    def to_json(self):
        return json.dumps(self.to_dict())


def mean_and_se(values):
    """Sample mean and standard error, independent of summation order."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    if np.all(x == x[0]):
        return float(x[0]), 0.0
    mean = math.fsum(x) / n
    if n == 1:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def run_paths(cost: RadialCost, policy: ControlPolicy, x0: float, cfg: SimConfig,
              workers: int = 1, observe=(), chunk: int = CHUNK) -> PathBatch:
    """All ``cfg.n_paths`` paths, simulated in chunks on a thread pool.

    Each path depends only on (seed, path index), and the chunks are joined
    in path order, so the result is identical for any worker count.
    """
    starts = list(range(0, cfg.n_paths, chunk))

    def work(first):
        return simulate_paths(cost, policy, x0, cfg, first, min(chunk, cfg.n_paths - first), observe)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    cat = np.concatenate
    return PathBatch(0, cat([p.exit_time for p in parts]), cat([p.cost for p in parts]),
                     cat([p.hit_cap for p in parts]), parts[0].obs_times,
                     cat([p.obs_z for p in parts]), cat([p.obs_cost for p in parts]))


def summarize(batch: PathBatch, label: str) -> CostEstimate:
    mean, se = mean_and_se(batch.cost)
    return CostEstimate(label, mean, se, int(batch.cost.size), float(np.mean(batch.hit_cap)))


def estimate_cost(cost: RadialCost, policy: ControlPolicy, x0: float, cfg: SimConfig,
                  workers: int = 1) -> CostEstimate:
    return summarize(run_paths(cost, policy, x0, cfg, workers), policy.label)


# ---------------------------------------------------------------------------
# analytic expected costs


def radial_oracle(cost: RadialCost, x0: float) -> float:
    """Expected cost of pure radial motion from radius ``x0``.

    One-dimensional Brownian motion started at ``x0`` and stopped at ``+-R``
    has Green's function ``G(x0, y)``.  Folding it onto radii gives
    ``2 int_x0^R (R - y) f + 2 (R - x0) int_0^x0 f``.  When ``f`` is not
    integrable at the origin the result is the signed infinity.
    """
    R = cost.R
    if not 0.0 <= x0 <= R:
        raise ValueError("x0 outside [0, R]")
    if not cost.origin_growth.f_integrable:
        return math.inf if cost.sign > 0 else -math.inf
    F, G = cost.antiderivative, cost.moment_antiderivative
    far = 2.0 * (R * (F(R) - F(x0)) - (G(R) - G(x0)))
    near = 2.0 * (R - x0) * (F(x0) - F(0.0)) if x0 > 0 else 0.0
    return far + near


def lambda_oracle(cost: RadialCost, lam: float, x0: float) -> float:
    """Expected cost under a constant mix ``lam`` in (0, 1] of radial motion.

    The radius generator is ``lam^2/2 u'' + (1 - lam^2)/(2 r) u'``.  Solving
    ``-generator u = f`` with ``u(R) = 0`` and a regular origin gives
    ``u(x) = 2/lam^2 int_0^R s^p f(s) K(max(x, s)) ds`` with
    ``p = (1 - lam^2)/lam^2`` and ``K(a) = int_a^R r^-p dr``.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    R = cost.R
    p = (1.0 - lam * lam) / (lam * lam)

    def K(a):
        if abs(p - 1.0) < 1e-14:
            return math.log(R / a)
        return (R ** (1.0 - p) - a ** (1.0 - p)) / (1.0 - p)

    def weight(s):
        # s^p K(s), continuous at 0 for every p
        if s == 0.0:
            return R if p == 0.0 else 0.0
        return s ** p * K(s)

    breaks = [b for b in cost.jumps + tuple(cost.breakpoints[1:-1])]
    opts = dict(epsabs=1e-12, epsrel=1e-11, limit=400)

    def quad(fn, a, b):
        if b <= a:
            return 0.0
        pts = [t for t in breaks if a < t < b] or None
        return integrate.quad(fn, a, b, points=pts, **opts)[0]

    inner = quad(lambda s: s ** p * float(cost(s)) if s > 0 else 0.0, 0.0, x0) * (K(x0) if x0 > 0 else 0.0)
    outer = quad(lambda s: float(cost(s)) * weight(s) if s > 0 else 0.0, x0, R)
    return 2.0 / (lam * lam) * (inner + outer)


def profile_schedule(policy: ControlPolicy, R: float) -> SwitchingSchedule:
    """Schedule whose radial/tangential zones match a policy with lam in {0, 1}."""
    edges, vals = policy.profile(R)
    if not set(vals.tolist()) <= {0.0, 1.0}:
        raise ValueError("policy mixes radial and tangential motion")
    case = "I" if vals[0] == 1.0 else "II"
    points = []
    for e, v in zip(edges[1:], vals[1:]):
        if e < R:
            points.append(("s" if v == 1.0 else "r", e))
    return SwitchingSchedule(case, tuple(points), R)


def policy_oracle(cost: RadialCost, policy: ControlPolicy, x0: float) -> float:
    """Analytic expected cost of a policy from radius ``x0``."""
    if policy.kind is PolicyKind.CONSTANT_LAMBDA and 0.0 < policy.lam < 1.0:
        return lambda_oracle(cost, policy.lam, x0)
    if policy.kind is PolicyKind.RADIAL or (policy.kind is PolicyKind.CONSTANT_LAMBDA and policy.lam == 1.0):
        return radial_oracle(cost, x0)
    if policy.kind is PolicyKind.CONSTANT_LAMBDA:
        policy = ControlPolicy.tangential()
    v = build_value(cost, profile_schedule(policy, cost.R), strict=False)
    return eval_value(v, x0)


def delta_error(cost: RadialCost, delta: float) -> float:
    """Extra cost of running radially on [0, delta) before tangential motion."""
    return float(integrate.quad(lambda y: 2.0 * (delta - 2.0 * y) * float(cost(y)) if y > 0 else 0.0,
                                0.0, delta, epsabs=1e-13, epsrel=1e-12, limit=200)[0])


# ---------------------------------------------------------------------------


@dataclass
class PolicyComparison:
    x0: float
    analytic_value: float
    rows: list  # dicts sorted by mean
    analytic_below_all: bool
    optimal_matches: bool

    def to_dict(self):
        return {"x0": self.x0, "analytic_value": self.analytic_value, "policies": self.rows,
                "checks": {"analytic_below_all": self.analytic_below_all,
                           "optimal_matches": self.optimal_matches}}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def default_delta(cost: RadialCost):
    return min(0.01 * cost.R, 0.5 * cost.eta)


def standard_policies(schedule, x0, R, delta):
    base = [ControlPolicy.optimal(schedule), ControlPolicy.radial(), ControlPolicy.tangential(),
            ControlPolicy.constant_lambda(0.5)]
    out = []
    for p in base:
        if x0 == 0.0 and p.lam_at(0.0, R) == 0.0:
            p = ControlPolicy.origin_delta(delta, p)
        out.append(p)
    return out


def compare_policies(cost: RadialCost, x0: float, cfg: SimConfig, delta=None, workers=1,
                     bias=BIAS_ALLOWANCE) -> PolicyComparison:
    """Estimate the standard policy family and check it against the analytic value."""
    schedule = build_schedule(cost)
    v = build_value(cost, schedule)
    target = eval_value(v, x0)
    delta = default_delta(cost) if delta is None else delta
    rows = []
    opt = None
    for policy in standard_policies(schedule, x0, cost.R, delta):
        try:
            est = estimate_cost(cost, policy, x0, cfg, workers)
        except RadialControlError as exc:
            rows.append({"policy": policy.label, "error": str(exc)})
            continue
        row = est.to_dict()
        row["ci95"] = est.ci95_halfwidth
        try:
            row["analytic"] = policy_oracle(cost, policy, x0)
        except (ValueError, RadialControlError):
            row["analytic"] = None
        rows.append(row)
        if policy.kind is PolicyKind.OPTIMAL or (policy.inner is not None and policy.inner.kind is PolicyKind.OPTIMAL):
            opt = row
    ok_rows = [r for r in rows if "mean" in r]
    ok_rows.sort(key=lambda r: r["mean"])
    rows = ok_rows + [r for r in rows if "mean" not in r]
    below = all(target <= r["mean"] + r["ci95"] + bias for r in ok_rows)
    matches = opt is not None and abs(opt["mean"] - target) <= opt["ci95"] + bias
    return PolicyComparison(x0, target, rows, below, matches)
