import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import cc_spec
from filippov2d.curves import SwitchingCurve
from filippov2d.errors import (HypothesisViolation, MaxOrderExceeded, NotSlidingOrEscaping)
from filippov2d.poly import Poly2, PolyField
from filippov2d.sigma import (Region, Visibility, classify_point, double_kind, extend_filippov,
                              filippov_field, filippov_vector, partition_sigma, region_from_signs,
                              sliding_speed)
from filippov2d.system import (LinearSpec, PiecewiseSystem, as_linear, check_hypotheses,
                               contact_order, equilibria, from_linear, from_relay)

x, y = Poly2.x(), Poly2.y()
K = (-3.0, 3.0, -3.0, 3.0)


def on_axis(X, Y, box=K):
    """Switching on x = 0 with X on x >= 0."""
    return PiecewiseSystem(SwitchingCurve.from_spec(x, {"kind": "vertical-line", "x": 0.0}, box),
                           X, Y, box)


def regions(sys):
    return [(iv.lo, iv.hi, iv.region) for iv in sys.partition.intervals]


# --- system ----------------------------------------------------------------

def test_contact_order_of_fold():
    X = PolyField(y, Poly2.const(-1))
    assert contact_order(X, x, (0.0, 0.0)) == (2, -1)
    assert contact_order(X, x, (0.0, 0.5)) == (1, 1)


def test_contact_order_infinite():
    with pytest.raises(MaxOrderExceeded):
        contact_order(PolyField(Poly2(), Poly2.const(1)), x, (0.0, 0.0))


def test_equilibria_of_center_center(cc):
    assert equilibria(cc.X, cc.K) == [pytest.approx((-2.0, 0.0))]
    assert np.allclose(equilibria(cc.Y, cc.K), [(-1.0, 0.0)])


def test_shipped_systems_satisfy_hypotheses(cc, tz, relay, folds):
    for s in (cc, tz, relay, folds):
        assert check_hypotheses(s).ok, s.name


def test_hypothesis_z1_non_isolated_equilibria():
    s = on_axis(PolyField(x * y, x * y), PolyField(Poly2.const(1), Poly2.const(0)))
    rep = check_hypotheses(s)
    assert not rep.z1 and not rep.ok


def test_hypothesis_z3_two_tangencies():
    s = on_axis(PolyField(y * y - 1, Poly2.const(1)), PolyField(Poly2.const(1), Poly2.const(0)))
    rep = check_hypotheses(s)
    assert not rep.z3 and "2 tangency points" in rep.messages[0]


def test_hypothesis_z3_tangent_along_sigma():
    s = on_axis(PolyField(Poly2(), Poly2.const(1)), PolyField(Poly2.const(1), Poly2.const(0)))
    assert not check_hypotheses(s).z3


def test_hypothesis_z2_non_isolated_pseudo_equilibria():
    # X = (-1, 0), Y = (1, 0): both arrive and the sliding field is identically zero
    s = on_axis(PolyField(Poly2.const(-1), Poly2()), PolyField(Poly2.const(1), Poly2()))
    assert not check_hypotheses(s).z2
    with pytest.raises(HypothesisViolation):
        partition_sigma(s)


def test_irregular_parametrization_flagged():
    s = PiecewiseSystem(SwitchingCurve.from_spec(x, {"kind": "vertical-line", "x": 1.0}, K),
                        PolyField(Poly2.const(1), Poly2()), PolyField(Poly2.const(1), Poly2()), K)
    assert not check_hypotheses(s).regular


def test_equilibrium_on_sigma_has_infinite_contact():
    F = PolyField.affine(((-0.1, 1), (-1, -0.1)), (0, 0))
    with pytest.raises(MaxOrderExceeded):
        partition_sigma(on_axis(F, F))


def test_linear_round_trip(cc):
    spec = as_linear(cc)
    assert spec == cc_spec(-1)
    assert as_linear(from_linear(spec)).A_minus == spec.A_minus


def test_linear_tangency_prediction():
    spec = cc_spec(1)
    assert spec.tangency("+") == (0.0, -1.0)
    assert spec.tangency("-") == (0.0, -1.0)
    flat = LinearSpec(((1, 0), (0, 1)), (1, 0), ((1, 1), (0, 1)), (0, 0))
    assert flat.tangency("+") is None


def test_relay_constructor_orientation(relay):
    assert relay.curve.kind == "horizontal-line"
    # Y is the relay with u = -1
    assert np.allclose(relay.Y(0.0, 0.0), -relay.X(0.0, 0.0))
    with pytest.raises(Exception):
        from_relay(((0, 1), (-1, 0)), (1, 0), (0, 0))


# --- regions and tangencies ---------------------------------------------------

def test_region_from_signs():
    assert region_from_signs(1, 2, 1e-9) is Region.SEWING
    assert region_from_signs(-1, -2, 1e-9) is Region.SEWING
    assert region_from_signs(-1, 2, 1e-9) is Region.SLIDING
    assert region_from_signs(1, -2, 1e-9) is Region.ESCAPING
    assert region_from_signs(0, 2, 1e-9) is Region.TANGENCY_X
    assert region_from_signs(1e-12, -1e-12, 1e-9) is Region.DOUBLE


def test_double_kinds():
    V, I = Visibility.VISIBLE, Visibility.INVISIBLE
    assert double_kind(2, I, 2, I) == "Elliptic"
    assert double_kind(2, V, 2, V) == "Hyperbolic"
    assert double_kind(2, V, 2, I) == "Parabolic"


def test_center_center_partition(cc):
    # on x = 0 with f = -x: X.f = y + 1 and Y.f = -(y + 1)
    assert [r for *_, r in regions(cc)] == [Region.SLIDING, Region.ESCAPING, Region.ESCAPING]
    rep = classify_point(cc, -1.0)
    assert rep.region is Region.DOUBLE and rep.double_kind == "Parabolic"
    assert (rep.orderX, rep.orderY) == (2, 2)
    pe, = cc.partition.pseudo_equilibria
    assert pe.stability == "attracting" and pe.region is Region.ESCAPING


def test_literal_orientation_mirrors_regions(cc_literal):
    assert [r for *_, r in regions(cc_literal)] == [Region.ESCAPING, Region.SLIDING, Region.SLIDING]
    assert classify_point(cc_literal, -1.0).double_kind == "Parabolic"


def test_three_zone_partition(tz):
    assert regions(tz) == [(-3, -1, Region.SEWING), (-1, 0, Region.ESCAPING),
                           (0, 3, Region.SEWING), (3, 5, Region.SEWING),
                           (5, 6, Region.SLIDING), (6, 9, Region.SEWING)]
    assert tz.partition.pseudo_equilibria == []
    assert classify_point(tz, -1.0).region is Region.TANGENCY_X
    assert classify_point(tz, 0.0).visibilityY is Visibility.VISIBLE


def test_type_one_point():
    s = on_axis(PolyField(y, Poly2.const(-1)), PolyField(y, Poly2.const(1)))
    rep = classify_point(s, 0.0)
    assert rep.double_kind == "Elliptic" and rep.special == "TypeI"


def test_type_two_point():
    # order 2 invisible for X, order 3 for Y, sliding below moving up into the point
    s = on_axis(PolyField(y, Poly2.const(-1)), PolyField(y * y, Poly2.const(1)))
    rep = classify_point(s, 0.0)
    assert (rep.orderX, rep.orderY) == (2, 3)
    assert rep.special == "TypeII"


# --- the Filippov field ----------------------------------------------------------

def test_filippov_field_rejects_sewing(tz):
    with pytest.raises(NotSlidingOrEscaping):
        filippov_field(tz, 1.5)


def test_filippov_limit_at_double_tangency(cc):
    # both sides of (0, -1) extend the field (0, -y/4) continuously
    assert np.allclose(filippov_field(cc, -1.0), (0.0, 0.25), atol=1e-7)


def test_sliding_speed_center_center(cc):
    for s in (-2.5, -2.0, -0.5, 1.0, 2.5):
        assert sliding_speed(cc, s) == pytest.approx(-s / 4, abs=1e-12)


def test_extension_through_double_tangency(cc):
    ext = extend_filippov(cc, -1.0)
    assert ext.kind == "RegularFlowThrough" and ext.direction == 1
    assert ext.left_speed == pytest.approx(0.25) and ext.right_speed == pytest.approx(0.25)


def test_extension_one_sided(tz):
    # escaping on (-1, 0) next to the fold at (-1, -1): field (0, x) = (0, -1)
    ext = extend_filippov(tz, -1.0)
    assert ext.kind == "RegularFlowThrough" and ext.direction == -1


def test_extension_needs_slide_neighbour(tz):
    with pytest.raises(NotSlidingOrEscaping):
        extend_filippov(tz, 3.0)
    with pytest.raises(NotSlidingOrEscaping):
        extend_filippov(tz, 1.234)


mats = st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))


@settings(max_examples=60, deadline=None)
@given(mats, mats, st.floats(-2.5, 2.5))
def test_filippov_field_is_tangent_convex_combination(p, m, yy):
    X = PolyField(Poly2.linear(p[0], p[1], p[2]), Poly2.linear(p[3], 1, 0))
    Y = PolyField(Poly2.linear(m[0], m[1], m[2]), Poly2.linear(m[3], -1, 0))
    s = on_axis(X, Y)
    a, b = float(X.u(0, yy)), float(Y.u(0, yy))
    assume(a * b < 0 and abs(a - b) > 1e-3)
    z = filippov_vector(s, (0.0, yy))
    lam = b / (b - a)
    assert 0 <= lam <= 1
    assert abs(z[0]) < 1e-9
    assert np.allclose(z, lam * X(0, yy) + (1 - lam) * Y(0, yy))


@settings(max_examples=30, deadline=None)
@given(mats, mats)
def test_partition_covers_sigma(p, m):
    # v = +-1 on the axis keeps equilibria off the switching line
    X = PolyField(Poly2.linear(p[0], p[1], p[2]), Poly2.linear(p[3], 0, 1))
    Y = PolyField(Poly2.linear(m[0], m[1], m[2]), Poly2.linear(m[3], 0, -1))
    assume(abs(p[1]) > 1e-3 and abs(m[1]) > 1e-3)
    # X.f = -Y.f everywhere makes the sliding field vanish identically
    assume(abs(p[1] + m[1]) > 1e-6 or abs(p[2] + m[2]) > 1e-6)
    part = on_axis(X, Y).partition
    ivs = part.intervals
    assert ivs[0].lo == -3 and ivs[-1].hi == 3
    assert all(a.hi == b.lo for a, b in zip(ivs, ivs[1:]))
    for iv in ivs:
        mid = 0.5 * (iv.lo + iv.hi)
        a, b = X.u(0, mid), Y.u(0, mid)
        assert region_from_signs(a, b, 0.0) is iv.region
