"""Parametrized switching curves.

A switching curve is the zero set of a polynomial ``f`` together with an
explicit parametrization ``s -> sigma(s)`` of its part inside the region of
interest.  Several disjoint pieces (e.g. the two lines x = -1 and x = 1 of
``f = x^2 - 1``) are laid end to end on one parameter axis; the junction
values are always breakpoints, so nothing ever slides across them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import SchemaError
from .poly import Poly2

Box = tuple[float, float, float, float]  # xmin, xmax, ymin, ymax

KINDS = ("vertical-line", "horizontal-line", "line", "circle", "explicit-parametric", "union")


@dataclass(frozen=True)
class Piece:
    kind: str
    params: dict
    lo: float
    hi: float
    offset: float = 0.0  # global s = local u + offset

    def local(self, s: float) -> float:
        return s - self.offset

    @property
    def s_lo(self) -> float:
        return self.lo + self.offset

    @property
    def s_hi(self) -> float:
        return self.hi + self.offset

    def point(self, u: float) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "vertical-line":
            return np.array([p["x"], u], dtype=float)
        if k == "horizontal-line":
            return np.array([u, p["y"]], dtype=float)
        if k == "line":
            return np.asarray(p["point"], float) + u * _unit(p["direction"])
        if k == "circle":
            c, r = np.asarray(p["center"], float), float(p["radius"])
            return c + r * np.array([math.cos(u), math.sin(u)])
        if k == "explicit-parametric":
            return np.array([np.polynomial.polynomial.polyval(u, p["x"]),
                             np.polynomial.polynomial.polyval(u, p["y"])])
        raise SchemaError(f"unknown sigma kind {k!r}")

    def tangent(self, u: float) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "vertical-line":
            return np.array([0.0, 1.0])
        if k == "horizontal-line":
            return np.array([1.0, 0.0])
        if k == "line":
            return _unit(p["direction"])
        if k == "circle":
            r = float(p["radius"])
            return r * np.array([-math.sin(u), math.cos(u)])
        if k == "explicit-parametric":
            P = np.polynomial.polynomial
            return np.array([P.polyval(u, P.polyder(p["x"])), P.polyval(u, P.polyder(p["y"]))])
        raise SchemaError(f"unknown sigma kind {k!r}")

    def project(self, q) -> tuple[float, float]:
        """(local parameter, distance) of the closest point of the piece to q."""
        q = np.asarray(q, float)
        k, p = self.kind, self.params
        if k == "vertical-line":
            u = q[1]
        elif k == "horizontal-line":
            u = q[0]
        elif k == "line":
            u = float(np.dot(q - np.asarray(p["point"], float), _unit(p["direction"])))
        elif k == "circle":
            d = q - np.asarray(p["center"], float)
            u = math.atan2(d[1], d[0])
            # keep the angle inside the parameter window when possible
            while u < self.lo - 1e-12:
                u += 2 * math.pi
            while u > self.hi + 1e-12:
                u -= 2 * math.pi
        else:
            grid = np.linspace(self.lo, self.hi, 401)
            dist = [np.linalg.norm(self.point(g) - q) for g in grid]
            i = int(np.argmin(dist))
            a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            res = minimize_scalar(lambda t: np.linalg.norm(self.point(t) - q),
                                  bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-14})
            u = self._polish(float(res.x), q)
        u = min(max(u, self.lo), self.hi)
        return float(u), float(np.linalg.norm(self.point(u) - q))


    def _polish(self, u: float, q, iters: int = 8) -> float:
        """Newton steps on (point(u) - q) . tangent(u) = 0 (explicit-parametric pieces)."""
        P = np.polynomial.polynomial
        cx, cy = self.params["x"], self.params["y"]
        d1 = (P.polyder(cx), P.polyder(cy))
        d2 = (P.polyder(cx, 2), P.polyder(cy, 2))
        for _ in range(iters):
            r = self.point(u) - q
            t1 = np.array([P.polyval(u, d1[0]), P.polyval(u, d1[1])])
            t2 = np.array([P.polyval(u, d2[0]), P.polyval(u, d2[1])])
            g, dg = float(r @ t1), float(t1 @ t1 + r @ t2)
            if dg <= 0:
                break
            step = g / dg
            u -= step
            if abs(step) < 1e-16:
                break
        return u


def _unit(d) -> np.ndarray:
    d = np.asarray(d, float)
    n = np.linalg.norm(d)
    if n == 0:
        raise SchemaError("line direction must be non-zero")
    return d / n


def _line_box_range(p0, d, K: Box) -> tuple[float, float]:
    """Parameter interval of {p0 + u d} inside the box K."""
    lo, hi = -math.inf, math.inf
    for axis, (kmin, kmax) in enumerate(((K[0], K[1]), (K[2], K[3]))):
        if abs(d[axis]) < 1e-300:
            if not kmin <= p0[axis] <= kmax:
                raise SchemaError("switching line misses the region K")
            continue
        t1, t2 = (kmin - p0[axis]) / d[axis], (kmax - p0[axis]) / d[axis]
        lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
    if not lo < hi:
        raise SchemaError("switching line misses the region K")
    return float(lo), float(hi)


@dataclass(frozen=True)
class SwitchingCurve:
    """Sigma = f^{-1}(0) with its parametrization over [alpha, beta]."""

    f: Poly2
    pieces: tuple[Piece, ...]
    spec: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_spec(cls, f: Poly2, spec: dict, K: Box) -> "SwitchingCurve":
        kind = spec.get("kind")
        if kind not in KINDS:
            raise SchemaError(f"sigma.kind must be one of {KINDS}, got {kind!r}")
        raw = spec["pieces"] if kind == "union" else [spec]
        pieces, offset = [], 0.0
        for n, sp in enumerate(raw):
            lo, hi = _piece_range(sp, K)
            if n == 0:
                off = 0.0
            else:
                off = offset - lo
            params = {k: v for k, v in sp.items() if k not in ("kind", "range")}
            pieces.append(Piece(sp["kind"], params, lo, hi, off))
            offset = hi + off
        return cls(f, tuple(pieces), dict(spec))

    @property
    def kind(self) -> str:
        return self.spec.get("kind", self.pieces[0].kind)

    @property
    def alpha(self) -> float:
        return self.pieces[0].s_lo

    @property
    def beta(self) -> float:
        return self.pieces[-1].s_hi

    @property
    def junctions(self) -> list[float]:
        return [p.s_hi for p in self.pieces[:-1]]

    def piece_at(self, s: float) -> Piece:
        for p in self.pieces:
            if s <= p.s_hi:
                return p
        return self.pieces[-1]

    def piece_bounds(self, s: float) -> tuple[float, float]:
        p = self.piece_at(s)
        return p.s_lo, p.s_hi

    def point(self, s: float) -> np.ndarray:
        p = self.piece_at(s)
        return p.point(p.local(s))

    __call__ = point

    def tangent(self, s: float) -> np.ndarray:
        p = self.piece_at(s)
        return p.tangent(p.local(s))

    def locate(self, q) -> tuple[float, float]:
        """(s, distance) of the nearest parametrized point to q."""
        best = None
        for p in self.pieces:
            u, d = p.project(q)
            if best is None or d < best[1]:
                best = (u + p.offset, d)
        return best

    def consistency(self, n: int = 201) -> tuple[float, float]:
        """(max |f(sigma(s))|, min |grad f(sigma(s))|) over a sample of [alpha, beta]."""
        fx, fy = self.f.grad()
        worst_f, min_grad = 0.0, math.inf
        for piece in self.pieces:
            for u in np.linspace(piece.lo, piece.hi, n):
                x, y = piece.point(u)
                worst_f = max(worst_f, abs(self.f(x, y)))
                min_grad = min(min_grad, math.hypot(fx(x, y), fy(x, y)))
        return worst_f, min_grad


def _piece_range(sp: dict, K: Box) -> tuple[float, float]:
    if "range" in sp:
        lo, hi = map(float, sp["range"])
        if not lo < hi:
            raise SchemaError("sigma range must satisfy lo < hi")
        return lo, hi
    kind = sp.get("kind")
    if kind == "vertical-line":
        return float(K[2]), float(K[3])
    if kind == "horizontal-line":
        return float(K[0]), float(K[1])
    if kind == "line":
        return _line_box_range(np.asarray(sp["point"], float), _unit(sp["direction"]), K)
    if kind == "circle":
        return -math.pi, math.pi
    raise SchemaError(f"sigma piece of kind {kind!r} needs an explicit 'range'")
