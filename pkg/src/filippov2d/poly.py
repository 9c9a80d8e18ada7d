"""Exact bivariate polynomials and polynomial planar vector fields.

Coefficients may be ``float`` or ``fractions.Fraction``; all algebra
(sum, product, partial derivatives, Lie derivatives) is carried out on the
coefficient dictionaries, so no numerical differentiation is ever involved.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

Monomial = tuple[int, int]


def _is_zero(c) -> bool:
    return c == 0


class Poly2:
    """p(x, y) = sum c_ij x^i y^j, stored canonically (no zero coefficients)."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, coeffs: Mapping[Monomial, Number] | None = None):
        terms = {}
        for (i, j), c in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent {(i, j)}")
            if not _is_zero(c):
                terms[(int(i), int(j))] = c
        self._terms = tuple(sorted(terms.items()))
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @classmethod
    def from_triples(cls, triples: Iterable) -> "Poly2":
        acc: dict[Monomial, Number] = {}
        for i, j, c in triples:
            acc[(i, j)] = acc.get((i, j), 0) + c
        return cls(acc)

    @classmethod
    def linear(cls, a, b, c=0) -> "Poly2":
        """a*x + b*y + c"""
        return cls({(1, 0): a, (0, 1): b, (0, 0): c})

    # basic properties ---------------------------------------------------
    @property
    def coeffs(self) -> dict[Monomial, Number]:
        return dict(self._terms)

    def triples(self) -> list[list]:
        return [[i, j, c] for (i, j), c in self._terms]

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((i + j for (i, j), _ in self._terms), default=-1)

    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for _, c in self._terms)

    def to_float(self) -> "Poly2":
        return Poly2({m: float(c) for m, c in self._terms})

    def to_exact(self) -> "Poly2":
        """Convert float coefficients to the exact rational they represent."""
        return Poly2({m: Fraction(c) for m, c in self._terms})

    # algebra ------------------------------------------------------------
    def __add__(self, other) -> "Poly2":
        other = _coerce(other)
        acc = dict(self._terms)
        for m, c in other._terms:
            acc[m] = acc.get(m, 0) + c
        return Poly2(acc)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({m: -c for m, c in self._terms})

    def __sub__(self, other) -> "Poly2":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Poly2":
        return _coerce(other) - self

    def __mul__(self, other) -> "Poly2":
        if isinstance(other, Number):
            return Poly2({m: c * other for m, c in self._terms})
        other = _coerce(other)
        acc: dict[Monomial, Number] = {}
        for (i1, j1), c1 in self._terms:
            for (i2, j2), c2 in other._terms:
                k = (i1 + i2, j1 + j2)
                acc[k] = acc.get(k, 0) + c1 * c2
        return Poly2(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly2":
        out = Poly2.const(1)
        for _ in range(n):
            out = out * self
        return out

    def dx(self) -> "Poly2":
        return Poly2({(i - 1, j): c * i for (i, j), c in self._terms if i > 0})

    def dy(self) -> "Poly2":
        return Poly2({(i, j - 1): c * j for (i, j), c in self._terms if j > 0})

    def grad(self) -> tuple["Poly2", "Poly2"]:
        return self.dx(), self.dy()

    # evaluation ---------------------------------------------------------
    def __call__(self, x, y):
        if np.ndim(x) == 0 and np.ndim(y) == 0:
            total = 0.0
            for (i, j), c in self._terms:
                total += float(c) * x ** i * y ** j
            return total
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for (i, j), c in self._terms:
            total = total + float(c) * x ** i * y ** j
        return total

    def eval_exact(self, x, y):
        """Evaluate with the coefficient arithmetic (exact for Fraction inputs)."""
        total = 0
        for (i, j), c in self._terms:
            total += c * x ** i * y ** j
        return total

    # comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = Poly2.const(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __repr__(self) -> str:
        return f"Poly2({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in reversed(self._terms):
            mono = "*".join(
                s for s in (
                    "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                    "" if j == 0 else ("y" if j == 1 else f"y^{j}"),
                ) if s
            )
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(parts)


def _coerce(p) -> Poly2:
    if isinstance(p, Poly2):
        return p
    if isinstance(p, Number):
        return Poly2.const(p)
    raise TypeError(f"cannot use {type(p).__name__} as a polynomial")


class PolyField:
    """Planar vector field (u(x, y), v(x, y)) with polynomial components."""

    __slots__ = ("u", "v")

    def __init__(self, u: Poly2, v: Poly2):
        self.u = _coerce(u)
        self.v = _coerce(v)

    @classmethod
    def affine(cls, A, b) -> "PolyField":
        """Field p -> A p + b."""
        return cls(Poly2.linear(A[0][0], A[0][1], b[0]),
                   Poly2.linear(A[1][0], A[1][1], b[1]))

    def __call__(self, x, y) -> np.ndarray:
        return np.array([self.u(x, y), self.v(x, y)])

    def lie(self, g: Poly2) -> Poly2:
        """<F, grad g>."""
        gx, gy = g.grad()
        return self.u * gx + self.v * gy

    def jacobian(self) -> tuple[tuple[Poly2, Poly2], tuple[Poly2, Poly2]]:
        return (self.u.dx(), self.u.dy()), (self.v.dx(), self.v.dy())

    def is_zero(self) -> bool:
        return self.u.is_zero() and self.v.is_zero()

    def __neg__(self) -> "PolyField":
        return PolyField(-self.u, -self.v)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyField) and self.u == other.u and self.v == other.v

    def __hash__(self) -> int:
        return hash((self.u, self.v))

    def __repr__(self) -> str:
        return f"PolyField(u={self.u}, v={self.v})"


def lie_derivative(field: PolyField, f: Poly2, order: int = 1) -> Poly2:
    """Iterated Lie derivative F^order . f (F^1.f = <F, grad f>)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    g = f
    for _ in range(order):
        g = field.lie(g)
    return g


def lie_tower(field: PolyField, f: Poly2, max_order: int) -> list[Poly2]:
    """[F^1.f, ..., F^max_order.f]."""
    out, g = [], f
    for _ in range(max_order):
        g = field.lie(g)
        out.append(g)
    return out
