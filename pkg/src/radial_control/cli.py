"""Command-line interface.

Exit codes: 0 success or PASS, 1 FAIL, 2 usage error, 3 invalid cost spec.
"""
from __future__ import annotations

import argparse
import json
import sys

from .cost import RadialCost
from .errors import (CostSpecError, DivergentIntegral, InconsistentDeclaration, NotMonotoneAtOrigin,
                     PolicyError, PolicyUndefinedAtOrigin)
from .hjb import FAIL, verify
from .montecarlo import compare_policies, estimate_cost
from .origin import classify_origin
from .sim import SimConfig, parse_policy, simulate_path
from .switching import SwitchingSchedule, build_schedule
from .value import build_value, tabulate, value_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SPEC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser():
    p = argparse.ArgumentParser(prog="radial-control",
                                description="Solve, simulate and check radially symmetric control problems.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_cost(sp):
        sp.add_argument("--cost", required=True, help="cost spec JSON file")

    def with_sim(sp, paths=True):
        sp.add_argument("--x0", type=float, required=True, help="starting radius in [0, R)")
        sp.add_argument("--dt", type=_positive_float, default=1e-4)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--delta", type=_positive_float, default=None,
                        help="run radially on [0, delta) before the chosen policy")
        sp.add_argument("--schedule", default=None, help="schedule JSON to use instead of solving")
        if paths:
            sp.add_argument("--paths", type=_positive_int, default=100_000)
            sp.add_argument("--workers", type=_positive_int, default=1)

    sp = sub.add_parser("solve", help="switching radii and value table")
    with_cost(sp)
    sp.add_argument("--grid", type=_positive_int, default=200, help="number of grid intervals")
    sp.add_argument("--out", required=True, help="value table CSV")
    sp.add_argument("--schedule", default=None, help="reuse a schedule JSON instead of solving")
    sp.add_argument("--schedule-out", default=None, help="also write the schedule JSON here")

    sp = sub.add_parser("classify", help="behaviour of the value at the origin")
    with_cost(sp)

    sp = sub.add_parser("simulate", help="simulate one path and export its trace")
    with_cost(sp)
    sp.add_argument("--policy", required=True, help="optimal | radial | tangential | lambda=<v>")
    with_sim(sp, paths=False)
    sp.add_argument("--path-index", type=int, default=0)
    sp.add_argument("--trace", required=True, help="trajectory CSV (t, Z, regime)")
    sp.add_argument("--positions", default=None, help="planar trajectory CSV (t, x1, x2), d = 2 only")

    sp = sub.add_parser("estimate", help="Monte Carlo cost of one policy")
    with_cost(sp)
    sp.add_argument("--policy", required=True)
    with_sim(sp)

    sp = sub.add_parser("compare", help="compare the standard policies with the analytic value")
    with_cost(sp)
    with_sim(sp)

    sp = sub.add_parser("check-hjb", help="finite-difference HJB residual check")
    with_cost(sp)
    sp.add_argument("--tol", type=_positive_float, default=1e-3)
    sp.add_argument("--out", default=None, help="residual CSV")
    return p


def _schedule(cost, path):
    if path is None:
        return build_schedule(cost)
    try:
        sched = SwitchingSchedule.load(path)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read schedule {path}: {exc}") from None
    if sched.case != cost.case or abs(sched.R - cost.R) > 1e-12 * cost.R:
        raise UsageError("schedule does not belong to this cost")
    return sched


def _check_x0(cost, x0):
    if not 0.0 <= x0 < cost.R:
        raise UsageError(f"--x0 must lie in [0, {cost.R:g})")


def _config(args):
    return SimConfig(dt=args.dt, seed=args.seed, n_paths=getattr(args, "paths", 1))


def cmd_solve(args, cost):
    sched = _schedule(cost, args.schedule)
    v = build_value(cost, sched)
    tabulate(v, value_grid(v, args.grid), args.out)
    text = sched.to_json()
    if args.schedule_out:
        with open(args.schedule_out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_classify(args, cost):
    print(classify_origin(cost).to_json())
    return EXIT_OK


def cmd_simulate(args, cost):
    _check_x0(cost, args.x0)
    sched = _schedule(cost, args.schedule) if args.policy.strip().lower() == "optimal" else None
    policy = parse_policy(args.policy, sched, args.delta)
    res = simulate_path(cost, policy, args.x0, _config(args), args.path_index,
                        trace=True, planar=args.positions is not None)
    res.trace.write_csv(args.trace)
    if args.positions:
        res.trace.write_positions_csv(args.positions)
    print(json.dumps({"policy": policy.label, "exit_time": res.exit_time,
                      "accumulated_cost": res.accumulated_cost, "hit_cap": res.hit_cap}))
    return EXIT_OK


def cmd_estimate(args, cost):
    _check_x0(cost, args.x0)
    sched = _schedule(cost, args.schedule) if args.policy.strip().lower() == "optimal" else None
    policy = parse_policy(args.policy, sched, args.delta)
    print(estimate_cost(cost, policy, args.x0, _config(args), args.workers).to_json())
    return EXIT_OK


def cmd_compare(args, cost):
    _check_x0(cost, args.x0)
    table = compare_policies(cost, args.x0, _config(args), args.delta, args.workers)
    print(table.to_json())
    return EXIT_OK if table.analytic_below_all and table.optimal_matches else EXIT_FAIL


def cmd_check_hjb(args, cost):
    v = build_value(cost, build_schedule(cost))
    report = verify(v, tol=args.tol)
    if args.out and report.residuals is not None:
        report.residuals.write_csv(args.out)
    print(report.summary())
    return EXIT_FAIL if report.status == FAIL else EXIT_OK


COMMANDS = {"solve": cmd_solve, "classify": cmd_classify, "simulate": cmd_simulate,
            "estimate": cmd_estimate, "compare": cmd_compare, "check-hjb": cmd_check_hjb}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cost = RadialCost.load(args.cost)
        return COMMANDS[args.command](args, cost)
    except (CostSpecError, NotMonotoneAtOrigin, InconsistentDeclaration, DivergentIntegral) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (UsageError, PolicyError, PolicyUndefinedAtOrigin, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
