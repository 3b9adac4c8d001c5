import json
import subprocess
import sys

import pytest

from radial_control.cli import main


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, spec in {
        "sin": {"kind": "sin", "R": 6, "dimension": 2},
        "step": {"kind": "step_decreasing", "rho": 0.5, "R": 1, "dimension": 2},
        "power": {"kind": "power", "alpha": 2.5, "sign": 1, "R": 1, "dimension": 2},
        "bad": {"kind": "power", "alpha": 1.5, "R": 1, "origin_growth": "Bounded"},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(spec))
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_prints_schedule_and_round_trips(specs, tmp_path, capsys):
    table, sched = tmp_path / "v.csv", tmp_path / "s.json"
    code, out, _ = run(capsys, "solve", "--cost", specs["sin"], "--out", table, "--schedule-out", sched)
    assert code == 0
    pts = [p["value"] for p in json.loads(out)["points"]]
    assert pts[0] == pytest.approx(2.3311, abs=1e-4) and pts[1] == pytest.approx(4.7124, abs=1e-4)
    again = tmp_path / "v2.csv"
    code, _, _ = run(capsys, "solve", "--cost", specs["sin"], "--out", again, "--schedule", sched)
    assert code == 0 and again.read_bytes() == table.read_bytes()
    lines = table.read_text().splitlines()
    assert lines[0] == "r,V,dV_left,dV_right,branch" and len(lines) == 202


def test_classify(specs, capsys):
    code, out, _ = run(capsys, "classify", "--cost", specs["power"])
    assert code == 0 and json.loads(out)["regime"] == "PlusInfinityAtOrigin"


def test_estimate_is_deterministic(specs, capsys):
    args = ("estimate", "--cost", specs["step"], "--policy", "optimal", "--x0", 0, "--delta", 0.01,
            "--paths", 500, "--seed", 3)
    code, out, _ = run(capsys, *args)
    assert code == 0
    est = json.loads(out)
    assert est["mean"] == -0.75 and est["n"] == 500
    args = ("estimate", "--cost", specs["step"], "--policy", "lambda=0.5", "--x0", 0.2, "--paths", 300, "--dt", 1e-3)
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_check_hjb(specs, tmp_path, capsys):
    code, out, _ = run(capsys, "check-hjb", "--cost", specs["sin"], "--out", tmp_path / "res.csv")
    assert code == 0 and out.startswith("PASS")
    assert (tmp_path / "res.csv").read_text().startswith("r,res_radial,res_tangential,active_branch")
    code, out, _ = run(capsys, "check-hjb", "--cost", specs["step"])
    assert code == 0 and out.startswith("SKIP")


def test_simulate_writes_traces(specs, tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--cost", specs["sin"], "--policy", "optimal", "--x0", 1, "--dt", 0.01,
                       "--trace", tmp_path / "t.csv", "--positions", tmp_path / "p.csv", "--path-index", 2)
    assert code == 0 and json.loads(out)["hit_cap"] is False
    assert (tmp_path / "t.csv").read_text().startswith("t,Z,regime")
    assert (tmp_path / "p.csv").read_text().startswith("t,x1,x2")


def test_compare(specs, capsys):
    code, out, _ = run(capsys, "compare", "--cost", specs["step"], "--x0", 0, "--paths", 2000, "--dt", 1e-3)
    assert code == 0
    table = json.loads(out)
    assert table["checks"] == {"analytic_below_all": True, "optimal_matches": True}


def test_exit_codes(specs, tmp_path, capsys):
    assert run(capsys, "classify", "--cost", specs["bad"])[0] == 3
    assert run(capsys, "classify", "--cost", tmp_path / "missing.json")[0] == 3
    code, _, err = run(capsys, "estimate", "--cost", specs["step"], "--policy", "radial", "--x0", 1.5)
    assert code == 2 and "x0" in err
    code, _, err = run(capsys, "estimate", "--cost", specs["step"], "--policy", "tangential", "--x0", 0, "--paths", 5)
    assert code == 2 and "delta" in err
    assert run(capsys, "estimate", "--cost", specs["step"], "--policy", "spin", "--x0", 0.2)[0] == 2
    for argv in (["bogus"], ["estimate", "--cost", specs["step"], "--policy", "radial", "--x0", 0.1, "--dt", "-1"],
                 ["estimate", "--cost", specs["step"], "--policy", "radial", "--x0", 0.1, "--paths", "0"]):
        with pytest.raises(SystemExit) as exc:
            main([str(a) for a in argv])
        assert exc.value.code == 2
    capsys.readouterr()


def test_module_entry_point(specs):
    proc = subprocess.run([sys.executable, "-m", "radial_control", "classify", "--cost", specs["power"]],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "PlusInfinityAtOrigin" in proc.stdout
