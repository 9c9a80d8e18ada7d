from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from filippov2d.poly import Poly2, PolyField, lie_derivative, lie_tower

coef = st.integers(-5, 5)
polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=6).map(Poly2)
pts = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def test_zero_coefficients_are_dropped():
    p = Poly2({(1, 0): 0, (0, 2): 3})
    assert p.coeffs == {(0, 2): 3}
    assert Poly2({}).is_zero()
    assert Poly2().degree == -1


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        Poly2({(-1, 0): 1})


def test_triples_round_trip():
    p = Poly2.from_triples([[2, 0, 1], [0, 0, -1], [2, 0, 2]])
    assert p.coeffs == {(2, 0): 3, (0, 0): -1}
    assert Poly2.from_triples(p.triples()) == p


def test_derivatives():
    x, y = Poly2.x(), Poly2.y()
    p = x ** 2 * y + 3 * y - 1
    assert p.dx() == 2 * x * y
    assert p.dy() == x ** 2 + 3
    assert p.grad() == (p.dx(), p.dy())


def test_exact_mode_keeps_fractions():
    p = Poly2({(1, 0): 0.5, (0, 0): 0.25}).to_exact()
    assert p.is_exact()
    assert p.eval_exact(Fraction(1, 3), 0) == Fraction(1, 6) + Fraction(1, 4)


def test_lie_derivative_of_linear_switching():
    # Sigma = {x = 0}: X.f is the first component of X
    X = PolyField.affine(((1, 2), (3, 4)), (5, 6))
    f = Poly2.x()
    assert lie_derivative(X, f) == Poly2.linear(1, 2, 5)
    assert lie_derivative(X, f, 2) == X.lie(X.lie(f))
    assert lie_tower(X, f, 3)[2] == lie_derivative(X, f, 3)
    with pytest.raises(ValueError):
        lie_derivative(X, f, 0)


def test_vectorised_evaluation_matches_scalar():
    p = Poly2({(2, 1): 1.5, (0, 0): -2})
    xs = np.linspace(-1, 1, 7)
    assert np.allclose(p(xs, xs), [p(float(t), float(t)) for t in xs])


@given(polys, polys, pts)
def test_ring_operations_match_evaluation(p, q, pt):
    x, y = pt
    assert (p + q)(x, y) == pytest.approx(p(x, y) + q(x, y), abs=1e-9)
    assert (p * q)(x, y) == pytest.approx(p(x, y) * q(x, y), rel=1e-9, abs=1e-8)
    assert (p - p).is_zero()


@given(polys, polys)
def test_product_rule(p, q):
    assert (p * q).dx() == p.dx() * q + p * q.dx()


@settings(max_examples=50)
@given(polys, pts)
def test_lie_is_directional_derivative(p, pt):
    F = PolyField(Poly2.linear(1, -2, 0.5), Poly2.linear(0.3, 1, -1))
    x, y = pt
    h = 1e-6
    u, v = F(x, y)
    fd = (p(x + h * u, y + h * v) - p(x - h * u, y - h * v)) / (2 * h)
    assert F.lie(p)(x, y) == pytest.approx(fd, rel=1e-4, abs=1e-4)
