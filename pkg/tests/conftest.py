import math

import numpy as np
import pytest
from hypothesis import strategies as st

from radial_control import RadialCost


def cubic_cost():
    # 3r - 12r^2 + 10r^3: rises, falls, rises again on [0, 1]
    return RadialCost.polynomial([0.0, 1.0], [[0.0, 3.0, -12.0, 10.0]])


@pytest.fixture
def step_decr():
    return RadialCost.step_decreasing(0.5)


@pytest.fixture
def step_incr():
    return RadialCost.step_increasing(0.5)


@pytest.fixture
def sinusoid():
    return RadialCost.sinusoid(6.0)


@pytest.fixture
def cubic():
    return cubic_cost()


@st.composite
def piecewise_polys(draw, max_pieces=2):
    """Continuous piecewise cubics on [0, R] with a non-flat first piece."""
    R = draw(st.floats(0.5, 3.0))
    n = draw(st.integers(1, max_pieces))
    inner = sorted(draw(st.lists(st.floats(0.1, 0.9), min_size=n - 1, max_size=n - 1, unique=True)))
    bps = [0.0] + [R * x for x in inner] + [R]
    if any(b - a < 0.05 * R for a, b in zip(bps, bps[1:])):
        bps = [0.0, R]
    coef = st.floats(-5.0, 5.0, allow_nan=False)
    rows = []
    left = draw(coef)
    for k in range(len(bps) - 1):
        c = [left] + [draw(coef) for _ in range(3)]
        if k == 0 and abs(c[1]) < 0.1:
            c[1] = 0.1 if c[1] >= 0 else -0.1
        # scale higher terms so the piece stays O(1)
        h = bps[k + 1] - bps[k]
        c = [c[0], c[1] / h, c[2] / h**2, c[3] / h**3]
        rows.append(c)
        left = sum(cj * h**j for j, cj in enumerate(c))
    return RadialCost.polynomial(bps, rows)


def scipy_quad(fn, a, b, points=()):
    from scipy import integrate

    pts = [p for p in points if a < p < b] or None
    return integrate.quad(fn, a, b, points=pts, epsabs=1e-13, epsrel=1e-12, limit=500)[0]


def sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


PI = math.pi


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
