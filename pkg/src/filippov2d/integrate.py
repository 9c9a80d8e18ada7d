"""Smooth-flow arcs with switching-curve event location.

Each arc is integrated with an explicit 8th-order Runge-Kutta method (scipy's
DOP853) driven one step at a time so that the dense interpolant of every step
can be scanned for sign changes of f (transversal hits) and for local minima of
side*f that touch zero (tangential arrivals at a fold).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .errors import StiffnessFailure
from .poly import Poly2, PolyField
from .tolerances import DEFAULT, Tolerances

RTOL = 1e-12
ATOL = 1e-12
MIN_STEP = 1e-12
N_SUB = 8
GRAZE_TOL = 1e-8   # |f| at a local minimum below which the orbit touches Sigma
T_IGNORE = 1e-9    # events this close to the arc start are start-up noise


@dataclass
class EventRecord:
    kind: str
    time: float
    point: tuple[float, float] | None = None
    s: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "time": self.time}
        if self.point is not None:
            d["point"] = [self.point[0], self.point[1]]
        if self.s is not None:
            d["s"] = self.s
        if self.detail:
            d["detail"] = self.detail
        return d

    def key(self) -> str:
        """Stable text form (used for determinism checks)."""
        pt = "" if self.point is None else f"{self.point[0]:.17g},{self.point[1]:.17g}"
        s = "" if self.s is None else f"{self.s:.17g}"
        return f"{self.kind}|{self.time:.17g}|{pt}|{s}|{self.detail}"


@dataclass
class Arc:
    mode: str  # FlowX | FlowY | Slide
    t0: float
    t1: float
    samples: np.ndarray  # rows (t, x, y)
    entry_event: EventRecord | None = None
    exit_event: EventRecord | None = None
    pieces: list = field(default_factory=list, repr=False)  # dense interpolants (t_lo, t_hi, fn)

    @property
    def start(self) -> np.ndarray:
        return self.samples[0, 1:]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1, 1:]

    def dense_points(self, n_per_piece: int = 6) -> np.ndarray:
        """Points along the arc including interior interpolated ones."""
        if not self.pieces:
            return self.samples[:, 1:]
        pts = [self.samples[:1, 1:]]
        for lo, hi, fn in self.pieces:
            ts = np.linspace(lo, hi, n_per_piece + 1)[1:]
            pts.append(np.asarray(fn(ts)).T)
        return np.vstack(pts)


class _FastField:
    """Callable (t, y) -> F(y) with cached float polynomials."""

    def __init__(self, field: PolyField, direction: int = 1):
        self.u = field.u.to_float()
        self.v = field.v.to_float()
        self.d = float(direction)

    def __call__(self, t, y):
        return np.array([self.d * self.u(y[0], y[1]), self.d * self.v(y[0], y[1])])


def _box_violation(K, x, y):
    return np.maximum.reduce([K[0] - x, x - K[1], K[2] - y, y - K[3]])


def integrate_arc(field: PolyField, start, t_max: float, *, f: Poly2 | None = None,
                  side: int = 0, K=None, stop_on_sigma: bool = True, direction: int = 1,
                  tol: Tolerances = DEFAULT, mode: str = "", rtol: float = RTOL,
                  atol: float = ATOL) -> tuple[Arc, EventRecord]:
    """Integrate one smooth arc.

    ``side`` is +1 when the field lives on {f >= 0} (so a hit is f going from
    positive to non-positive), -1 for {f <= 0}, and 0 to detect any sign
    change.  Returns the arc and the terminating event: HitSigma (transversal
    or tangential), ExitK or TimeBudget.
    """
    start = np.asarray(start, float)
    rhs = _FastField(field, direction)
    ff = f.to_float() if f is not None else None
    lf = PolyField(rhs.u, rhs.v).lie(ff) if ff is not None else None
    if lf is not None and direction < 0:
        lf = -lf
    pad = 1e-9
    samples = [(0.0, start[0], start[1])]
    pieces = []
    if t_max <= 0:
        ev = EventRecord("TimeBudget", 0.0, (float(start[0]), float(start[1])))
        return Arc(mode, 0.0, 0.0, np.array(samples), None, ev, pieces), ev

    solver = DOP853(rhs, 0.0, start, t_bound=t_max, rtol=rtol, atol=atol,
                    first_step=min(1e-3, t_max))
    sgn = float(side)

    while True:
        t_old = solver.t
        msg = solver.step()
        if solver.status == "failed":
            raise StiffnessFailure(f"integration failed at t={t_old}: {msg}")
        if solver.step_size is not None and solver.step_size < MIN_STEP and solver.status == "running":
            raise StiffnessFailure(f"step size underflow at t={t_old}")
        dense = solver.dense_output()
        t_new = solver.t
        ts = np.linspace(t_old, t_new, N_SUB + 1)
        ys = dense(ts)
        event = None

        if ff is not None and stop_on_sigma:
            fv = ff(ys[0], ys[1])
            lv = lf(ys[0], ys[1])
            if sgn == 0:
                nz = np.nonzero(np.abs(fv) > 1e-14)[0]
                if len(nz):
                    sgn = float(np.sign(fv[nz[0]]))
            if sgn != 0:
                event = _scan(ts, fv, lv, dense, ff, lf, sgn)

        if K is not None:
            bv = _box_violation(K, ys[0], ys[1])
            idx = np.nonzero(bv > pad)[0]
            if len(idx):
                i = idx[0]
                t_exit = brentq(lambda t: _box_violation(K, *dense(t)) - pad, ts[i - 1], ts[i],
                                xtol=1e-14) if i > 0 else ts[0]
                if event is None or t_exit < event[0]:
                    event = (t_exit, "ExitK", "")

        if event is not None:
            te, kind, detail = event
            pt = dense(te)
            pieces.append((t_old, te, dense))
            samples.append((te, pt[0], pt[1]))
            ev = EventRecord(kind, float(te), (float(pt[0]), float(pt[1])), None, detail)
            return Arc(mode, 0.0, float(te), np.array(samples), None, ev, pieces), ev

        pieces.append((t_old, t_new, dense))
        samples.append((t_new, ys[0, -1], ys[1, -1]))
        if solver.status == "finished":
            ev = EventRecord("TimeBudget", float(t_new), (float(ys[0, -1]), float(ys[1, -1])))
            return Arc(mode, 0.0, float(t_new), np.array(samples), None, ev, pieces), ev


def _scan(ts, fv, lv, dense, ff, lf, sgn):
    """First transversal or tangential hit inside one step, or None."""
    best = None
    g = sgn * fv
    for i in range(len(ts) - 1):
        if g[i] > 0 and g[i + 1] <= 0:
            t = ts[i + 1] if g[i + 1] == 0 else brentq(
                lambda t: ff(*dense(t)), ts[i], ts[i + 1], xtol=1e-15)
            if t > T_IGNORE:
                best = (t, "HitSigma", "transversal")
                break
    # a local minimum of side*f that touches zero is a tangential arrival
    gl = sgn * lv
    for i in range(len(ts) - 1):
        if best is not None and ts[i] >= best[0]:
            break
        if gl[i] < 0 <= gl[i + 1]:
            t = brentq(lambda t: lf(*dense(t)), ts[i], ts[i + 1], xtol=1e-15)
            if t > T_IGNORE and abs(ff(*dense(t))) <= GRAZE_TOL and (best is None or t < best[0]):
                best = (t, "HitSigma", "tangential")
                break
    return best
