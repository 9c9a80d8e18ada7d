"""Root isolation for scalar functions on an interval and for planar
polynomial systems."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import sympy
from scipy.optimize import brentq, minimize_scalar

from .errors import NonIsolatedEquilibria
from .poly import Poly2

_X, _Y = sympy.symbols("x y")


class IdenticallyZero(Exception):
    """The sampled function vanishes (to tolerance) on the whole interval."""


def isolate_roots(g: Callable[[float], float], lo: float, hi: float, *,
                  zero_tol: float, xtol: float = 1e-12, n: int = 1201) -> list[float]:
    """Sorted roots of ``g`` on [lo, hi].

    Sign changes on a uniform sample are refined with Brent's method; local
    minima of |g| without a sign change (even-multiplicity roots) are refined
    by bounded minimisation and kept when |g| <= zero_tol there.  Raises
    ``IdenticallyZero`` when every sample is below ``zero_tol``.
    """
    s = np.linspace(lo, hi, n)
    v = np.array([g(t) for t in s])
    if np.all(np.abs(v) <= zero_tol):
        raise IdenticallyZero
    roots: list[float] = []
    for i in range(n):
        if v[i] == 0.0:
            roots.append(float(s[i]))
    for i in range(n - 1):
        if v[i] * v[i + 1] < 0:
            roots.append(float(brentq(g, s[i], s[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    av = np.abs(v)
    for i in range(1, n - 1):
        if av[i] <= av[i - 1] and av[i] <= av[i + 1] and v[i - 1] * v[i + 1] > 0 and v[i] != 0:
            res = minimize_scalar(lambda t: abs(g(t)), bounds=(s[i - 1], s[i + 1]),
                                  method="bounded", options={"xatol": xtol})
            if abs(g(res.x)) <= zero_tol:
                roots.append(float(res.x))
    for end in (0, n - 1):
        if 0 < av[end] <= zero_tol:
            roots.append(float(s[end]))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > max(10 * xtol, 1e-9):
            merged.append(r)
    return merged


def to_sympy(p: Poly2) -> sympy.Poly:
    expr = sum(sympy.Rational(c) * _X ** i * _Y ** j for (i, j), c in p.coeffs.items())
    return sympy.Poly(expr if p.coeffs else sympy.Integer(0), _X, _Y)


def _has_zero_in_box(p: Poly2, K, n: int = 161) -> bool:
    xs = np.linspace(K[0], K[1], n)
    ys = np.linspace(K[2], K[3], n)
    X, Y = np.meshgrid(xs, ys)
    V = p.to_float()(X, Y)
    scale = max(1.0, float(np.max(np.abs(V))))
    if np.min(np.abs(V)) <= 1e-12 * scale:
        return True
    return bool(np.any(V > 0) and np.any(V < 0))


def common_zeros(u: Poly2, v: Poly2, K, *, tol: float = 1e-10) -> list[tuple[float, float]]:
    """Isolated common zeros of (u, v) in the box K = (xmin, xmax, ymin, ymax).

    Uses an exact rational resultant in y, certified real-root intervals for
    the x coordinates, then univariate solves and a Newton polish.
    """
    if u.is_zero() and v.is_zero():
        raise ValueError("both components vanish identically")
    for p, q in ((u, v), (v, u)):
        if p.is_zero():
            if _has_zero_in_box(q, K):
                raise NonIsolatedEquilibria("one component is identically zero")
            return []
    U, V = to_sympy(u.to_exact()), to_sympy(v.to_exact())
    G = sympy.gcd(U, V)
    if G.total_degree() > 0:
        g = Poly2({m: float(c) for m, c in zip(G.monoms(), G.coeffs())})
        if _has_zero_in_box(g, K):
            raise NonIsolatedEquilibria(f"components share the factor {G.as_expr()}")
        U = sympy.div(U, G)[0]
        V = sympy.div(V, G)[0]
    R = sympy.Poly(sympy.resultant(U.as_expr(), V.as_expr(), _Y), _X)
    width = max(K[1] - K[0], K[3] - K[2])
    pad = 1e-6 * max(1.0, width)
    if R.is_zero:
        raise NonIsolatedEquilibria("vanishing resultant")
    xs: list[float] = []
    if R.degree() > 0:
        for (a, b), _ in R.intervals(eps=sympy.Rational(1, 10 ** 12)):
            x0 = float((a + b) / 2)
            if K[0] - pad <= x0 <= K[1] + pad:
                xs.append(x0)
    uf, vf = u.to_float(), v.to_float()
    out: list[tuple[float, float]] = []
    for x0 in xs:
        for y0 in _candidate_ys(uf, vf, x0):
            p = _newton(uf, vf, x0, y0)
            if p is None:
                continue
            if not (K[0] - pad <= p[0] <= K[1] + pad and K[2] - pad <= p[1] <= K[3] + pad):
                continue
            if any(math.hypot(p[0] - q[0], p[1] - q[1]) < 1e3 * tol for q in out):
                continue
            out.append(p)
    out.sort()
    return out


def _univariate_in_y(p: Poly2, x0: float) -> np.ndarray:
    deg = max((j for (_, j) in p.coeffs), default=0)
    c = np.zeros(deg + 1)
    for (i, j), a in p.coeffs.items():
        c[j] += float(a) * x0 ** i
    return c


def _candidate_ys(u: Poly2, v: Poly2, x0: float) -> list[float]:
    cands: list[float] = []
    for p in (u, v):
        c = _univariate_in_y(p, x0)
        scale = max(1.0, float(np.max(np.abs(c))))
        c = np.where(np.abs(c) < 1e-13 * scale, 0.0, c)
        nz = np.nonzero(c)[0]
        if len(nz) == 0 or nz[-1] == 0:
            continue
        r = np.polynomial.polynomial.polyroots(c[: nz[-1] + 1])
        cands.extend(float(z.real) for z in r if abs(z.imag) < 1e-6 * max(1.0, abs(z)))
    return cands


def _newton(u: Poly2, v: Poly2, x: float, y: float, iters: int = 50):
    ux, uy, vx, vy = u.dx(), u.dy(), v.dx(), v.dy()
    for _ in range(iters):
        F = np.array([u(x, y), v(x, y)])
        J = np.array([[ux(x, y), uy(x, y)], [vx(x, y), vy(x, y)]])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        x, y = x - step[0], y - step[1]
        if np.hypot(*step) < 1e-15 * max(1.0, abs(x) + abs(y)):
            break
    resid = math.hypot(u(x, y), v(x, y))
    if not math.isfinite(resid) or resid > 1e-8:
        return None
    return (float(x), float(y))
