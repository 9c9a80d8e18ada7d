from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cc_spec
from filippov2d.chaos import (chaos_conditions, circuit_region, construct_lambda,
                              linear_chaos_conditions, minimality_probe, sample_interior,
                              theorem2_probes)
from filippov2d.errors import DegenerateA12, NotChaoticConfiguration, ProbeBudgetExceeded
from filippov2d.system import LinearSpec


def H_X(x, y):
    # first integral of X about its center (-2, 0)
    u, v = x + 2, y
    return u * u + u * v + v * v


def H_Y(x, y):
    # first integral of Y about its center (-1, 0)
    u, v = x + 1, y
    return 2 * u * u + 2 * u * v + v * v


def in_lambda_oracle(x, y):
    """Left: between the X orbit through the tangency and the one through the origin;
    right: inside the Y orbit through the origin."""
    left = (x <= 0) & (H_X(x, y) >= 3) & (H_X(x, y) <= 4)
    right = (x >= 0) & (H_Y(x, y) <= 2)
    return left | right


def test_lambda_area_matches_first_integrals(cc_lambda):
    h = 0.004
    xs = np.arange(-5 + h / 2, 2, h)
    ys = np.arange(-3 + h / 2, 3, h)
    X, Y = np.meshgrid(xs, ys)
    area = in_lambda_oracle(X, Y).sum() * h * h
    assert cc_lambda.area == pytest.approx(area, rel=5e-3)


@pytest.mark.parametrize("q", [(-3.8, 0.0), (0.2, -1.0), (-0.5, 1.5), (-4.2, 0.0), (0.5, -1.0),
                               (-1.0, -1.5), (-2.0, 0.0), (1.5, 0.0)])
def test_lambda_membership(cc_lambda, q):
    assert cc_lambda.contains(q) == bool(in_lambda_oracle(*q))


def test_lambda_geometry(cc_lambda):
    assert cc_lambda.kind == "Parabolic"
    assert cc_lambda.closure_gap <= 1e-6
    assert cc_lambda.q_e_plus == pytest.approx(0.0, abs=1e-8)
    # both boundary orbits land at (0, -2): H_X = 4 and H_Y = 2 there
    assert cc_lambda.landings["X"] == pytest.approx(-2.0, abs=1e-8)
    assert cc_lambda.landings["Y"] == pytest.approx(-2.0, abs=1e-8)
    assert len(cc_lambda.holes) == 1


def test_lambda_rejects_other_configurations(cc, tz, relay):
    with pytest.raises(NotChaoticConfiguration):
        construct_lambda(cc, 0.5)   # not a breakpoint
    with pytest.raises(NotChaoticConfiguration):
        construct_lambda(tz, -1.0)  # fold, not a double tangency
    with pytest.raises(NotChaoticConfiguration):
        construct_lambda(relay, 0.3)


def test_chaos_conditions(cc, tz):
    res = chaos_conditions(cc)
    assert all(res[k] for k in ("double_tangency", "parabolic_or_hyperbolic", "no_crossing_in_K",
                                "two_sided_visits_witness"))
    res = chaos_conditions(tz)
    assert not res["double_tangency"] and not res["no_crossing_in_K"]


def test_linear_conditions_exact():
    res = linear_chaos_conditions(cc_spec(1))
    assert res["i"] and res["i_value"] == Fraction(0)
    assert res["iii"] and res["iii_value"] < 0
    assert res["tangency_plus"] == res["tangency_minus"] == (0, -1)
    assert res["consistent"]


def test_linear_conditions_degenerate():
    spec = LinearSpec(((1, 0), (0, 1)), (1, 0), ((1, 1), (0, 1)), (0, 0))
    with pytest.raises(DegenerateA12):
        linear_chaos_conditions(spec)


@settings(max_examples=100)
@given(st.integers(-3, 3), st.integers(1, 4), st.integers(1, 4), st.floats(1e-3, 1.0),
       st.booleans())
def test_condition_one_iff_shared_tangency(t, a12p, a12m, d, shift):
    # both folds at (0, t) unless b1+ is shifted by d
    b1p = -t * a12p + (d if shift else 0)
    spec = LinearSpec(((0, a12p), (1, 0)), (b1p, 0), ((0, -a12m), (1, 0)), (t * a12m, 0))
    res = linear_chaos_conditions(spec)
    assert res["i"] is not shift
    assert res["consistent"] and res["iii"]


def test_circuit_region(tz):
    lam = circuit_region(tz, (-1.0, 0.0))
    assert lam.kind == "Circuit" and lam.closure_gap <= 1e-6
    assert lam.area > 0.1 and lam.contains((-1.2, -1.0))
    assert not lam.contains((2.5, 2.5))


def test_sample_interior_seeded(cc_lambda):
    a = sample_interior(cc_lambda, 10, seed=4)
    b = sample_interior(cc_lambda, 10, seed=4)
    assert np.array_equal(a, b)
    assert all(cc_lambda.contains(q) for q in a)


def test_sample_interior_budget(cc_lambda):
    with pytest.raises(ProbeBudgetExceeded):
        sample_interior(cc_lambda, 10, seed=0, margin=100.0)


def test_theorem2_probe_rejects_outside_sample(cc, cc_lambda):
    with pytest.raises(ValueError):
        theorem2_probes(cc, cc_lambda, samples=[(1.5, 0.0)], coverage={"coverage": 1.0})


def test_minimality_small(cc, cc_lambda):
    res = minimality_probe(cc, cc_lambda, hub=(0.0, -1.0), n_samples=4, seed=2)
    assert res["passed"] and res["hub"] == [0.0, -1.0]
    with pytest.raises(ValueError):
        minimality_probe(cc, cc_lambda, hub=(0.5, 0.0), n_samples=1)
