import itertools
import json

import pytest

from radial_control import Growth, InconsistentDeclaration, Monotone, RadialCost, Regime, classify_origin
from radial_control import build_schedule, build_value, eval_value
from radial_control.origin import classify_regime

from conftest import scipy_quad

INC, DEC = Monotone.INCREASING, Monotone.DECREASING
FIN, MINF, PINF, WEAK = (Regime.FINITE_EQUALS_V, Regime.MINUS_INFINITY_EVERYWHERE,
                         Regime.PLUS_INFINITY_AT_ORIGIN, Regime.WEAK_FINITE_STRONG_OPEN)
BAD = InconsistentDeclaration

# (monotone, growth) -> outcome for d = 2 and d = 3
TABLE = {
    (INC, Growth.BOUNDED): (FIN, FIN),
    (INC, Growth.INTEGRABLE_F): (FIN, FIN),
    (INC, Growth.INTEGRABLE_SF_ONLY): (BAD, BAD),
    (INC, Growth.NON_INTEGRABLE_SF): (BAD, BAD),
    (INC, Growth.NEGATIVE_NON_INTEGRABLE): (MINF, MINF),
    (DEC, Growth.BOUNDED): (FIN, FIN),
    (DEC, Growth.INTEGRABLE_F): (FIN, FIN),
    (DEC, Growth.INTEGRABLE_SF_ONLY): (WEAK, FIN),
    (DEC, Growth.NON_INTEGRABLE_SF): (PINF, PINF),
    (DEC, Growth.NEGATIVE_NON_INTEGRABLE): (BAD, BAD),
}


@pytest.mark.parametrize("mono,growth,d", list(itertools.product(Monotone, Growth, (2, 3))))
def test_truth_table(mono, growth, d):
    expected = TABLE[(mono, growth)][d - 2]
    if expected is BAD:
        with pytest.raises(InconsistentDeclaration):
            classify_regime(mono, growth, d)
    else:
        assert classify_regime(mono, growth, d)[0] is expected


def test_power_law_origin_values():
    a = classify_origin(RadialCost.power(0.5))
    assert a.regime is FIN
    assert abs(a.v0 - 2 * scipy_quad(lambda s: s ** 0.5, 0, 1)) < 1e-8
    assert abs(a.v0 - 4 / 3) < 1e-8
    b = classify_origin(RadialCost.power(1.5))
    assert b.regime is WEAK
    assert abs(b.v0 - 2 * scipy_quad(lambda s: s ** -0.5, 0, 1)) < 1e-8
    assert abs(b.v0 - 4.0) < 1e-8
    assert classify_origin(RadialCost.power(1.5, dimension=3)).regime is FIN


def test_infinite_regimes():
    plus = classify_origin(RadialCost.power(2.5))
    assert plus.regime is PINF and plus.v0 is None
    assert json.loads(plus.to_json())["regime"] == "PlusInfinityAtOrigin"
    minus = classify_origin(RadialCost.power(1.2, sign=-1))
    assert minus.regime is MINF and minus.v0 is None


@pytest.mark.parametrize("cost", [RadialCost.power(0.5), RadialCost.power(0.9, R=2.0),
                                  RadialCost.polynomial([0, 1], [[2, -1]]), RadialCost.step_decreasing(0.4)])
def test_v0_is_the_limit_of_the_value(cost):
    v0 = classify_origin(cost).v0
    v = build_value(cost, build_schedule(cost))
    near = eval_value(v, 1e-6 * cost.R)
    assert abs(near - v0) <= 1e-3 * max(1.0, abs(v0))


def test_dimension_one_rejected():
    with pytest.raises(InconsistentDeclaration):
        classify_regime(DEC, Growth.BOUNDED, 1)
