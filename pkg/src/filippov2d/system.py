"""Piecewise-smooth planar systems Z = (X, Y) split by a switching curve."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .curves import Box, SwitchingCurve
from .errors import DegenerateSwitching, MaxOrderExceeded, NonIsolatedEquilibria
from .poly import Poly2, PolyField, lie_tower
from .roots import IdenticallyZero, common_zeros, isolate_roots
from .tolerances import DEFAULT, Tolerances

INF_ORDER = math.inf


@dataclass(frozen=True)
class PiecewiseSystem:
    """X is active where f >= 0, Y where f <= 0; K is the region of interest."""

    curve: SwitchingCurve
    X: PolyField
    Y: PolyField
    K: Box
    tol: Tolerances = DEFAULT
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def f(self) -> Poly2:
        return self.curve.f

    def field(self, which: str) -> PolyField:
        return self.X if which == "X" else self.Y

    @cached_property
    def towerX(self) -> list[Poly2]:
        return lie_tower(self.X, self.f, self.tol.max_order)

    @cached_property
    def towerY(self) -> list[Poly2]:
        return lie_tower(self.Y, self.f, self.tol.max_order)

    def tower(self, which: str) -> list[Poly2]:
        return self.towerX if which == "X" else self.towerY

    @cached_property
    def _grad_f(self) -> tuple[Poly2, Poly2]:
        return self.f.to_float().grad()

    def grad_f(self, p) -> np.ndarray:
        gx, gy = self._grad_f
        return np.array([gx(p[0], p[1]), gy(p[0], p[1])])

    def Xf(self, s: float) -> float:
        x, y = self.curve.point(s)
        return self.towerX[0](x, y)

    def Yf(self, s: float) -> float:
        x, y = self.curve.point(s)
        return self.towerY[0](x, y)

    def in_K(self, p, pad: float = 0.0) -> bool:
        K = self.K
        return K[0] - pad <= p[0] <= K[1] + pad and K[2] - pad <= p[1] <= K[3] + pad

    def with_tol(self, tol: Tolerances) -> "PiecewiseSystem":
        return PiecewiseSystem(self.curve, self.X, self.Y, self.K, tol, self.name, dict(self.meta))

    def window(self, K: Box, sigma_spec: dict | None = None) -> "PiecewiseSystem":
        """Same fields restricted to a smaller box (re-parametrizing Sigma)."""
        curve = SwitchingCurve.from_spec(self.f, sigma_spec or self.curve.spec, K)
        return PiecewiseSystem(curve, self.X, self.Y, tuple(K), self.tol, self.name, dict(self.meta))

    def hypotheses(self) -> "HypothesisReport":
        return check_hypotheses(self)

    @cached_property
    def partition(self):
        from .sigma import partition_sigma
        return partition_sigma(self)


def contact_order(field: PolyField, curve: SwitchingCurve | Poly2, s_or_point,
                  max_order: int = DEFAULT.max_order, eps: float = DEFAULT.tan) -> tuple[int, int]:
    """(n, sign) of the first Lie derivative F^n.f that does not vanish at the point.

    ``curve`` may be a SwitchingCurve (then ``s_or_point`` is a parameter) or
    the polynomial f itself (then ``s_or_point`` is a point).  Raises
    MaxOrderExceeded when all orders up to ``max_order`` vanish.
    """
    if isinstance(curve, SwitchingCurve):
        f, p = curve.f, curve.point(s_or_point)
    else:
        f, p = curve, s_or_point
    for n, g in enumerate(lie_tower(field, f, max_order), start=1):
        val = g(p[0], p[1])
        if abs(val) > eps:
            return n, int(np.sign(val))
    raise MaxOrderExceeded(f"all Lie derivatives up to order {max_order} vanish at {tuple(p)}")


def order_at(tower: list[Poly2], p, eps: float) -> tuple[float, int]:
    """Like contact_order but with a precomputed tower; (inf, 0) when all vanish."""
    for n, g in enumerate(tower, start=1):
        val = g(p[0], p[1])
        if abs(val) > eps:
            return n, int(np.sign(val))
    return INF_ORDER, 0


def equilibria(field: PolyField, K: Box, tol: Tolerances = DEFAULT) -> list[tuple[float, float]]:
    return common_zeros(field.u, field.v, K, tol=tol.root)


# --- constructors -----------------------------------------------------------

@dataclass(frozen=True)
class LinearSpec:
    """X(p) = A+ p + b+ on the side normal*x >= 0, Y(p) = A- p + b- on the other."""

    A_plus: tuple
    b_plus: tuple
    A_minus: tuple
    b_minus: tuple
    K: Box = (-3.0, 3.0, -3.0, 3.0)
    normal: int = 1

    def tangency(self, side: str):
        A, b = (self.A_plus, self.b_plus) if side == "+" else (self.A_minus, self.b_minus)
        if A[0][1] == 0:
            return None
        return (0.0, -b[0] / A[0][1])

    def exact(self) -> "LinearSpec":
        def q(m):
            return tuple(tuple(Fraction(c) for c in row) for row in m)
        return replace(self, A_plus=q(self.A_plus), A_minus=q(self.A_minus),
                       b_plus=tuple(map(Fraction, self.b_plus)),
                       b_minus=tuple(map(Fraction, self.b_minus)))


def from_linear(spec: LinearSpec, tol: Tolerances = DEFAULT, name: str = "") -> PiecewiseSystem:
    if spec.normal not in (1, -1):
        raise ValueError("normal must be +1 or -1")
    f = Poly2.linear(spec.normal, 0)
    X = PolyField.affine(spec.A_plus, spec.b_plus)
    Y = PolyField.affine(spec.A_minus, spec.b_minus)
    curve = SwitchingCurve.from_spec(f, {"kind": "vertical-line", "x": 0.0}, spec.K)
    meta = {"predicted_tangency": {"X": spec.tangency("+"), "Y": spec.tangency("-")}}
    return PiecewiseSystem(curve, X, Y, tuple(spec.K), tol, name, meta)


def from_relay(A, B, C, K: Box = (-3.0, 3.0, -3.0, 3.0), tol: Tolerances = DEFAULT,
               name: str = "") -> PiecewiseSystem:
    """x' = A x + B u with u = sgn(<C, x>)."""
    c1, c2 = C
    if c1 == 0 and c2 == 0:
        raise DegenerateSwitching("C must be non-zero")
    f = Poly2.linear(c1, c2)
    X = PolyField.affine(A, B)
    Y = PolyField.affine(A, (-B[0], -B[1]))
    if c1 == 0:
        spec = {"kind": "horizontal-line", "y": 0.0}
    elif c2 == 0:
        spec = {"kind": "vertical-line", "x": 0.0}
    else:
        spec = {"kind": "line", "point": [0.0, 0.0], "direction": [-float(c2), float(c1)]}
    curve = SwitchingCurve.from_spec(f, spec, K)
    return PiecewiseSystem(curve, X, Y, tuple(K), tol, name, {"relay": {"A": A, "B": B, "C": C}})


# --- hypothesis checks ------------------------------------------------------

@dataclass
class HypothesisReport:
    z1: bool = True   # finitely many equilibria of X and Y in K
    z2: bool = True   # isolated pseudo-equilibria
    z3: bool = True   # at most one tangency per field on each piece of Sigma
    regular: bool = True  # 0 is a regular value of f along sigma
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.z1 and self.z2 and self.z3 and self.regular


def tangency_roots(sys: PiecewiseSystem, which: str) -> list[float]:
    """Parameters where F.f vanishes along sigma, per piece; raises IdenticallyZero."""
    g = sys.tower(which)[0]
    out = []
    for piece in sys.curve.pieces:
        def h(s, piece=piece):
            x, y = piece.point(piece.local(s))
            return g(x, y)
        out.extend(isolate_roots(h, piece.s_lo, piece.s_hi, zero_tol=sys.tol.tan,
                                 xtol=sys.tol.root))
    return out


def check_hypotheses(sys: PiecewiseSystem) -> HypothesisReport:
    rep = HypothesisReport()
    for which in ("X", "Y"):
        try:
            equilibria(sys.field(which), sys.K, sys.tol)
        except NonIsolatedEquilibria as e:
            rep.z1 = False
            rep.messages.append(f"{which}: non-isolated equilibria ({e})")
        try:
            roots = tangency_roots(sys, which)
        except IdenticallyZero:
            rep.z3 = False
            rep.messages.append(f"{which} is tangent to the switching curve along a whole piece")
            continue
        for piece in sys.curve.pieces:
            k = sum(piece.s_lo <= r <= piece.s_hi for r in roots)
            if k > 1:
                rep.z3 = False
                rep.messages.append(f"{which} has {k} tangency points on one piece of the switching curve")
    worst_f, min_grad = sys.curve.consistency()
    if worst_f > sys.tol.on_sigma or min_grad <= sys.tol.tan:
        rep.regular = False
        rep.messages.append(f"parametrization inconsistent: max|f|={worst_f:.3g}, min|grad f|={min_grad:.3g}")
    # Z2 (isolated pseudo-equilibria) is checked by the sigma analysis itself
    from .sigma import pseudo_equilibria
    from .errors import HypothesisViolation
    if rep.z3:
        try:
            pseudo_equilibria(sys)
        except HypothesisViolation as e:
            rep.z2 = False
            rep.messages.append(str(e))
    return rep


def as_linear(sys: PiecewiseSystem) -> LinearSpec | None:
    """The LinearSpec of an affine system switching on x = 0, or None."""
    f = sys.f.coeffs
    if set(f) != {(1, 0)} or abs(f[(1, 0)]) != 1 or sys.curve.kind != "vertical-line":
        return None
    if any(p.degree > 1 for p in (sys.X.u, sys.X.v, sys.Y.u, sys.Y.v)):
        return None

    def affine(F):
        rows, b = [], []
        for p in (F.u, F.v):
            c = p.coeffs
            rows.append((c.get((1, 0), 0), c.get((0, 1), 0)))
            b.append(c.get((0, 0), 0))
        return tuple(rows), tuple(b)

    Ap, bp = affine(sys.X)
    Am, bm = affine(sys.Y)
    return LinearSpec(Ap, bp, Am, bm, tuple(sys.K), int(f[(1, 0)]))
