import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radial_control import (ControlPolicy, DivergentIntegral, PolicyError, PolicyUndefinedAtOrigin, RadialCost,
                            SimConfig, build_schedule, simulate_path, simulate_paths, step_z)
from radial_control.montecarlo import run_paths
from radial_control.sim import parse_policy

from conftest import cubic_cost


def test_step_z_examples():
    assert step_z(0.25, "tangential", 0.7, 0.01) == pytest.approx(0.26, abs=1e-15)
    assert step_z(0.0, "radial", 1.3, 1e-3) == 1e-3
    assert step_z(0.3, 1.0, 0.2, 1e-3) == step_z(0.3, "radial", 0.2, 1e-3)
    assert step_z(0.25, "radial", 0.1, 1e-3, scheme="exact") == pytest.approx(0.36, abs=1e-15)
    assert step_z(0.25, 0.0, 5.0, 0.01, scheme="exact") == pytest.approx(0.26, abs=1e-15)
    with pytest.raises(ValueError):
        step_z(-1.0, "radial", 0.0, 1e-3)


@given(st.floats(0.0, 4.0), st.floats(-3.0, 3.0), st.floats(1e-6, 1e-2), st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_step_z_non_negative_and_schemes_consistent(z, g, dt, lam):
    dw = g * math.sqrt(dt)
    assert step_z(z, lam, dw, dt) >= 0.0
    assert step_z(z, lam, dw, dt, scheme="exact") >= 0.0
    # both schemes agree to first order in dW
    e = step_z(z, lam, dw, dt)
    x = step_z(z, lam, dw, dt, scheme="exact")
    if z + dt + 2 * lam * math.sqrt(z) * dw > 0:
        assert abs(e - x - lam * lam * (dt - dw * dw)) < 1e-12


def test_tangential_path_is_deterministic(step_decr):
    cfg = SimConfig(dt=1e-4)
    res = simulate_path(step_decr, ControlPolicy.tangential(), 0.5, cfg)
    assert res.exit_time == 0.75
    assert res.accumulated_cost == pytest.approx(-0.75, abs=1e-15)
    other = simulate_path(step_decr, ControlPolicy.tangential(), 0.5, SimConfig(dt=1e-4, seed=99), 17)
    assert (other.exit_time, other.accumulated_cost) == (res.exit_time, res.accumulated_cost)


@given(st.floats(0.01, 0.99))
@settings(max_examples=20, deadline=None)
def test_tangential_trace_is_z0_plus_t(x0):
    res = simulate_path(RadialCost.sinusoid(1.0), ControlPolicy.tangential(), x0, SimConfig(dt=1e-3), trace=True)
    tr = res.trace
    z0 = x0 * x0
    assert np.all(tr.z[:-1] == z0 + tr.t[:-1])
    assert tr.z[-1] == 1.0
    assert res.accumulated_cost == pytest.approx(2 * (math.sin(1) - math.cos(1) - math.sin(x0) + x0 * math.cos(x0)),
                                                 abs=1e-12)


def test_lambda_one_is_radial(cubic):
    cfg = SimConfig(dt=1e-3, seed=3, n_paths=200)
    a = simulate_paths(cubic, ControlPolicy.radial(), 0.2, cfg)
    b = simulate_paths(cubic, ControlPolicy.constant_lambda(1.0), 0.2, cfg)
    assert np.array_equal(a.cost, b.cost) and np.array_equal(a.exit_time, b.exit_time)


def test_paths_depend_only_on_seed_and_index(cubic):
    cfg = SimConfig(dt=1e-3, seed=11, n_paths=300)
    pol = ControlPolicy.optimal(build_schedule(cubic))
    full = simulate_paths(cubic, pol, 0.1, cfg)
    part = simulate_paths(cubic, pol, 0.1, cfg, first=120, count=50)
    assert np.array_equal(full.cost[120:170], part.cost)
    single = simulate_path(cubic, pol, 0.1, cfg, path_index=130)
    assert single.accumulated_cost == full.cost[130] and single.exit_time == full.exit_time[130]
    one = run_paths(cubic, pol, 0.1, cfg, workers=1, chunk=64)
    many = run_paths(cubic, pol, 0.1, cfg, workers=4, chunk=64)
    assert np.array_equal(one.cost, many.cost) and np.array_equal(one.cost, full.cost)
    again = simulate_paths(cubic, pol, 0.1, SimConfig(dt=1e-3, seed=12, n_paths=300))
    assert not np.array_equal(again.cost, full.cost)


def test_radial_exit_time_from_origin():
    cfg = SimConfig(dt=1e-3, seed=5, n_paths=20_000)
    b = simulate_paths(RadialCost.sinusoid(1.0), ControlPolicy.radial(), 0.0, cfg)
    se = b.exit_time.std(ddof=1) / math.sqrt(b.exit_time.size)
    assert abs(b.exit_time.mean() - 1.0) < 3 * se
    assert not b.hit_cap.any()


def test_invalid_starts_and_policies(step_decr, sinusoid):
    cfg = SimConfig(dt=1e-3)
    with pytest.raises(PolicyUndefinedAtOrigin):
        simulate_path(step_decr, ControlPolicy.tangential(), 0.0, cfg)
    with pytest.raises(PolicyUndefinedAtOrigin):
        simulate_path(step_decr, ControlPolicy.optimal(build_schedule(step_decr)), 0.0, cfg)
    with pytest.raises(ValueError):
        simulate_path(step_decr, ControlPolicy.radial(), 1.0, cfg)
    with pytest.raises(PolicyError):
        simulate_path(step_decr, ControlPolicy.origin_delta(0.6, ControlPolicy.tangential()), 0.0, cfg)
    with pytest.raises(PolicyError):
        simulate_path(step_decr, ControlPolicy.optimal(build_schedule(sinusoid)), 0.3, cfg)
    with pytest.raises(DivergentIntegral):
        simulate_path(RadialCost.power(1.5), ControlPolicy.radial(), 0.5, cfg)
    with pytest.raises(ValueError):
        simulate_path(RadialCost.sinusoid(dimension=3), ControlPolicy.radial(), 0.5, cfg, planar=True)
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)


def test_delta_wrapper_starts_radially(step_decr):
    pol = ControlPolicy.origin_delta(0.01, ControlPolicy.optimal(build_schedule(step_decr)))
    res = simulate_path(step_decr, pol, 0.0, SimConfig(dt=1e-4), trace=True)
    assert res.trace.regime_names()[1] == "radial"
    assert res.accumulated_cost == -0.75


def test_parse_policy(step_decr):
    sched = build_schedule(step_decr)
    assert parse_policy("radial").label == "radial"
    assert parse_policy("lambda=0.5").lam == 0.5
    assert parse_policy("optimal", sched).schedule == sched
    assert parse_policy("tangential", delta=0.01).delta == 0.01
    for bad in ("lambda=2", "spiral", "optimal"):
        with pytest.raises((ValueError, PolicyError)):
            parse_policy(bad)


def test_trace_files(sinusoid, tmp_path):
    pol = ControlPolicy.optimal(build_schedule(sinusoid))
    res = simulate_path(sinusoid, pol, 1.0, SimConfig(dt=1e-2, seed=4), trace=True, planar=True)
    tr = res.trace
    assert np.allclose(np.hypot(tr.x1, tr.x2) ** 2, tr.z, rtol=1e-12, atol=1e-12)
    assert tr.z[-1] == pytest.approx(36.0)
    assert set(tr.regime_names()) == {"radial", "tangential"}
    tr.write_csv(tmp_path / "t.csv")
    tr.write_positions_csv(tmp_path / "p.csv")
    with open(tmp_path / "t.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "Z", "regime"] and len(rows) == tr.t.size + 1
    with open(tmp_path / "p.csv") as fh:
        assert next(csv.reader(fh)) == ["t", "x1", "x2"]
    plain = simulate_path(sinusoid, pol, 1.0, SimConfig(dt=1e-2, seed=4))
    assert plain.trace is None


def test_observation_times_and_cap(step_decr):
    cfg = SimConfig(dt=1e-3, seed=2, n_paths=50)
    b = simulate_paths(step_decr, ControlPolicy.radial(), 0.3, cfg, observe=(0.1, 0.3, 0.5))
    assert b.obs_z.shape == (50, 3)
    exited = b.exit_time <= 0.1
    assert np.all(b.obs_z[exited, 0] == 1.0)
    capped = simulate_path(step_decr, ControlPolicy.radial(), 0.0, SimConfig(dt=1e-3, max_time=0.05))
    assert capped.hit_cap and capped.exit_time == 0.05


def test_policy_profiles():
    sched = build_schedule(cubic_cost())
    edges, vals = ControlPolicy.optimal(sched).profile(1.0)
    assert list(vals) == [1.0, 0.0, 1.0]
    assert np.allclose(edges[1:3], sched.radii)
    edges, vals = ControlPolicy.origin_delta(0.05, ControlPolicy.tangential()).profile(1.0)
    assert list(vals) == [1.0, 0.0] and edges[1] == 0.05
