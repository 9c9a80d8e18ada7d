"""Classification of the switching curve and the Filippov sliding field."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import HypothesisViolation, MaxOrderExceeded, NotSlidingOrEscaping
from .roots import IdenticallyZero, isolate_roots
from .system import INF_ORDER, PiecewiseSystem, order_at, tangency_roots


class Region(str, Enum):
    SEWING = "Sewing"
    SLIDING = "Sliding"
    ESCAPING = "Escaping"
    TANGENCY_X = "TangencyX"
    TANGENCY_Y = "TangencyY"
    DOUBLE = "DoubleTangency"


SLIDE_REGIONS = (Region.SLIDING, Region.ESCAPING)


class Visibility(str, Enum):
    VISIBLE = "Visible"
    INVISIBLE = "Invisible"
    NOT_TANGENT = "NotTangent"


@dataclass(frozen=True)
class SigmaPointReport:
    s: float
    point: tuple[float, float]
    region: Region
    orderX: float
    orderY: float
    signX: int
    signY: int
    visibilityX: Visibility
    visibilityY: Visibility
    double_kind: str = "None"
    special: str = "None"

    def to_dict(self) -> dict:
        return {
            "s": self.s, "point": list(self.point), "region": self.region.value,
            "orderX": _order_json(self.orderX), "orderY": _order_json(self.orderY),
            "visibilityX": self.visibilityX.value, "visibilityY": self.visibilityY.value,
            "double_kind": self.double_kind, "special": self.special,
        }


def _order_json(n):
    return None if n == INF_ORDER else int(n)


def region_from_signs(a: float, b: float, eps: float) -> Region:
    tx, ty = abs(a) <= eps, abs(b) <= eps
    if tx and ty:
        return Region.DOUBLE
    if tx:
        return Region.TANGENCY_X
    if ty:
        return Region.TANGENCY_Y
    if a * b > 0:
        return Region.SEWING
    return Region.SLIDING if a < 0 else Region.ESCAPING


def visibility(which: str, order: float, sign: int) -> Visibility:
    if order == 1:
        return Visibility.NOT_TANGENT
    if order % 2 == 1:
        return Visibility.VISIBLE
    # X lives on f > 0: visible when the orbit bends back into f > 0
    if which == "X":
        return Visibility.VISIBLE if sign > 0 else Visibility.INVISIBLE
    return Visibility.VISIBLE if sign < 0 else Visibility.INVISIBLE


def double_kind(nx, vx: Visibility, ny, vy: Visibility) -> str:
    even_vis_x = vx is Visibility.VISIBLE and nx % 2 == 0
    even_vis_y = vy is Visibility.VISIBLE and ny % 2 == 0
    if vx is Visibility.INVISIBLE and vy is Visibility.INVISIBLE:
        return "Elliptic"
    if even_vis_x and even_vis_y:
        return "Hyperbolic"
    if even_vis_x != even_vis_y:
        return "Parabolic"
    return "None"


def _probe_offset(sys: PiecewiseSystem, s: float) -> float:
    lo, hi = sys.curve.piece_bounds(s)
    return min(1e-5, (hi - lo) * 1e-6)


def classify_point(sys: PiecewiseSystem, s: float, *, with_special: bool = True) -> SigmaPointReport:
    eps = sys.tol.tan
    p = sys.curve.point(s)
    a = sys.towerX[0](*p)
    b = sys.towerY[0](*p)
    region = region_from_signs(a, b, eps)
    nx, sx = order_at(sys.towerX, p, eps)
    ny, sy = order_at(sys.towerY, p, eps)
    if nx == INF_ORDER or ny == INF_ORDER:
        raise MaxOrderExceeded(f"contact of infinite order suspected at s={s}")
    vx, vy = visibility("X", nx, sx), visibility("Y", ny, sy)
    dk = double_kind(nx, vx, ny, vy) if region is Region.DOUBLE else "None"
    special = "None"
    if with_special and region in (Region.DOUBLE, Region.TANGENCY_X, Region.TANGENCY_Y):
        special = _special(sys, s, region, nx, vx, ny, vy, dk)
    return SigmaPointReport(float(s), (float(p[0]), float(p[1])), region, nx, ny, sx, sy,
                            vx, vy, dk, special)


def _side_regions(sys: PiecewiseSystem, s: float) -> tuple[Region | None, Region | None]:
    lo, hi = sys.curve.piece_bounds(s)
    h = _probe_offset(sys, s)
    out = []
    for t in (s - h, s + h):
        if lo <= t <= hi:
            p = sys.curve.point(t)
            # plain signs: next to a high-order contact the values sit below tol.tan
            out.append(region_from_signs(sys.towerX[0](*p), sys.towerY[0](*p), 0.0))
        else:
            out.append(None)
    return out[0], out[1]


def _special(sys, s, region, nx, vx, ny, vy, dk) -> str:
    left, right = _side_regions(sys, s)
    if region is Region.DOUBLE and dk == "Elliptic" and left is Region.SEWING and right is Region.SEWING:
        return "TypeI"
    invisible_odd = ((vx is Visibility.INVISIBLE and ny % 2 == 1)
                     or (vy is Visibility.INVISIBLE and nx % 2 == 1))
    if region is Region.DOUBLE and invisible_odd:
        h = _probe_offset(sys, s)
        for side, reg in ((-1, left), (1, right)):
            if reg is Region.SLIDING:
                v = sliding_speed(sys, s + side * h)
                if v * side < 0:
                    return "TypeII"
    return "None"


# --- the Filippov field -----------------------------------------------------

def filippov_vector(sys: PiecewiseSystem, p) -> np.ndarray:
    """(X.f Y - Y.f X) / (X.f - Y.f) at a point of Sigma, no region check."""
    a = sys.towerX[0](p[0], p[1])
    b = sys.towerY[0](p[0], p[1])
    return (a * sys.Y(p[0], p[1]) - b * sys.X(p[0], p[1])) / (a - b)


def _lie_grad_along(sys: PiecewiseSystem, which: str, s: float) -> float:
    """d/ds of F.f(sigma(s))."""
    g = sys.tower(which)[0]
    p, t = sys.curve.point(s), sys.curve.tangent(s)
    return g.dx()(*p) * t[0] + g.dy()(*p) * t[1]


def filippov_limit(sys: PiecewiseSystem, s0: float, side: int = 0) -> np.ndarray:
    """Limit of the Filippov field at a zero of X.f - Y.f.

    Uses l'Hopital when the denominator has a simple zero; otherwise a
    Richardson extrapolation from the side ``side`` (+1 or -1).
    """
    p = sys.curve.point(s0)
    da = _lie_grad_along(sys, "X", s0)
    db = _lie_grad_along(sys, "Y", s0)
    if abs(da - db) > 1e3 * sys.tol.tan:
        return (da * sys.Y(*p) - db * sys.X(*p)) / (da - db)
    side = side or 1
    hs = [10.0 ** -k for k in range(3, 8)]
    vals = [filippov_vector(sys, sys.curve.point(s0 + side * h)) for h in hs]
    # first-order Richardson on the geometric sequence h, h/10
    ext = [(10 * vals[i + 1] - vals[i]) / 9 for i in range(len(vals) - 1)]
    return ext[-1]


def speed_of(sys: PiecewiseSystem, s: float, vec) -> float:
    t = sys.curve.tangent(s)
    return float(np.dot(vec, t) / np.dot(t, t))


def sliding_speed(sys: PiecewiseSystem, s: float, *, near: float = 1e-7) -> float:
    """ds/dt of the reduced sliding equation at s.

    Within ``near`` of a zero of the denominator the (removable) singularity
    is replaced by the limiting value.
    """
    p = sys.curve.point(s)
    a = sys.towerX[0](*p)
    b = sys.towerY[0](*p)
    if abs(a - b) <= 1e3 * sys.tol.tan:
        part = sys.partition if "partition" in sys.__dict__ else None
        s0 = s
        if part is not None:
            s0 = part.nearest_breakpoint(s, near) or s
        return speed_of(sys, s, filippov_limit(sys, s0, 1 if s >= s0 else -1))
    return speed_of(sys, s, (a * sys.Y(*p) - b * sys.X(*p)) / (a - b))


def filippov_field(sys: PiecewiseSystem, s: float) -> np.ndarray:
    """Filippov sliding vector at sigma(s); raises on sewing points."""
    p = sys.curve.point(s)
    a = sys.towerX[0](*p)
    b = sys.towerY[0](*p)
    eps = sys.tol.tan
    if a * b > 0 and abs(a) > eps and abs(b) > eps:
        raise NotSlidingOrEscaping(f"s={s} lies in a sewing interval")
    if abs(a - b) <= 1e3 * eps:
        return filippov_limit(sys, s)
    return (a * sys.Y(*p) - b * sys.X(*p)) / (a - b)


# --- partition --------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    region: Region


@dataclass(frozen=True)
class PseudoEquilibrium:
    s: float
    point: tuple[float, float]
    stability: str  # attracting | repelling | semi-stable
    region: Region

    def to_dict(self) -> dict:
        return {"s": self.s, "point": list(self.point), "stability": self.stability,
                "region": self.region.value}


@dataclass
class SigmaPartition:
    breakpoints: list[float]
    intervals: list[Interval]
    reports: dict[float, SigmaPointReport]
    pseudo_equilibria: list[PseudoEquilibrium] = field(default_factory=list)
    tangencies: dict[str, list[float]] = field(default_factory=dict)

    def interval_at(self, s: float) -> Interval | None:
        """Open interval containing s (None at breakpoints)."""
        i = bisect.bisect_right(self.breakpoints, s) - 1
        if 0 <= i < len(self.intervals):
            iv = self.intervals[i]
            if iv.lo < s < iv.hi:
                return iv
        return None

    def region_at(self, s: float) -> Region | None:
        iv = self.interval_at(s)
        return iv.region if iv else None

    def nearest_breakpoint(self, s: float, within: float) -> float | None:
        i = bisect.bisect_left(self.breakpoints, s)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(self.breakpoints) and abs(self.breakpoints[j] - s) <= within:
                if best is None or abs(self.breakpoints[j] - s) < abs(best - s):
                    best = self.breakpoints[j]
        return best

    def neighbours(self, s_b: float) -> tuple[Interval | None, Interval | None]:
        left = right = None
        for iv in self.intervals:
            if iv.hi == s_b:
                left = iv
            if iv.lo == s_b:
                right = iv
        return left, right

    def to_dict(self) -> dict:
        return {
            "breakpoints": self.breakpoints,
            "intervals": [[iv.lo, iv.hi, iv.region.value] for iv in self.intervals],
            "points": [self.reports[b].to_dict() for b in self.breakpoints],
            "pseudo_equilibria": [pe.to_dict() for pe in self.pseudo_equilibria],
        }


def _tangencies(sys: PiecewiseSystem) -> dict[str, list[float]]:
    out = {}
    for which in ("X", "Y"):
        try:
            roots = tangency_roots(sys, which)
        except IdenticallyZero:
            raise HypothesisViolation(f"{which} is tangent to the switching curve along a whole piece")
        for piece in sys.curve.pieces:
            k = sum(piece.s_lo <= r <= piece.s_hi for r in roots)
            if k > 1:
                raise HypothesisViolation(
                    f"{which} has {k} tangency points on one piece of the switching curve")
        out[which] = roots
    return out


def _merge(points: list[float], gap: float) -> list[float]:
    out: list[float] = []
    for p in sorted(points):
        if not out or p - out[-1] > gap:
            out.append(p)
    return out


def _raw_intervals(sys, cuts):
    ivs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        p = sys.curve.point(mid)
        reg = region_from_signs(sys.towerX[0](*p), sys.towerY[0](*p), sys.tol.tan)
        ivs.append(Interval(lo, hi, reg))
    return ivs


def _pe_on(sys: PiecewiseSystem, iv: Interval) -> list[PseudoEquilibrium]:
    width = iv.hi - iv.lo
    pad = min(1e-6, width * 1e-4)
    lo, hi = iv.lo + pad, iv.hi - pad

    def v(s):
        p = sys.curve.point(s)
        a = sys.towerX[0](*p)
        b = sys.towerY[0](*p)
        return speed_of(sys, s, (a * sys.Y(*p) - b * sys.X(*p)) / (a - b))

    try:
        roots = isolate_roots(v, lo, hi, zero_tol=sys.tol.tan, xtol=sys.tol.root)
    except IdenticallyZero:
        raise HypothesisViolation("the sliding field vanishes on a whole interval (non-isolated pseudo-equilibria)")
    out = []
    for r in roots:
        h = min(1e-4, 0.25 * min(r - iv.lo, iv.hi - r))
        left, right = v(r - h), v(r + h)
        if left > 0 > right:
            stab = "attracting"
        elif left < 0 < right:
            stab = "repelling"
        else:
            stab = "semi-stable"
        p = sys.curve.point(r)
        out.append(PseudoEquilibrium(float(r), (float(p[0]), float(p[1])), stab, iv.region))
    return out


def partition_sigma(sys: PiecewiseSystem) -> SigmaPartition:
    tang = _tangencies(sys)
    ends = [sys.curve.alpha, sys.curve.beta] + sys.curve.junctions
    cuts = _merge(ends + tang["X"] + tang["Y"], 1e-9)
    intervals = _raw_intervals(sys, cuts)
    pes: list[PseudoEquilibrium] = []
    for iv in intervals:
        if iv.region in SLIDE_REGIONS:
            pes.extend(_pe_on(sys, iv))
    if pes:
        cuts = _merge(cuts + [pe.s for pe in pes], 1e-9)
        intervals = _raw_intervals(sys, cuts)
    reports = {b: classify_point(sys, b) for b in cuts}
    return SigmaPartition(cuts, intervals, reports, pes, tang)


def pseudo_equilibria(sys: PiecewiseSystem) -> list[PseudoEquilibrium]:
    return list(sys.partition.pseudo_equilibria)


def double_tangencies(sys: PiecewiseSystem) -> list[SigmaPointReport]:
    return [r for r in sys.partition.reports.values() if r.region is Region.DOUBLE]


# --- extension beyond the sliding/escaping boundary -------------------------

@dataclass(frozen=True)
class Extension:
    kind: str  # RegularFlowThrough | ExtendedPseudoEquilibrium | NotExtendable
    direction: int = 0
    left_speed: float | None = None
    right_speed: float | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "direction": self.direction,
                "left_speed": self.left_speed, "right_speed": self.right_speed}


def _one_sided_speed(sys: PiecewiseSystem, s_b: float, side: int) -> float:
    p = sys.curve.point(s_b)
    a = sys.towerX[0](*p)
    b = sys.towerY[0](*p)
    if abs(a - b) > 1e3 * sys.tol.tan:
        vec = (a * sys.Y(*p) - b * sys.X(*p)) / (a - b)
    else:
        vec = filippov_limit(sys, s_b, side)
    return speed_of(sys, s_b, vec)


def extend_filippov(sys: PiecewiseSystem, s_b: float) -> Extension:
    part = sys.partition
    sb = part.nearest_breakpoint(s_b, 1e-8)
    if sb is None:
        raise NotSlidingOrEscaping(f"s={s_b} is not a breakpoint of the partition")
    left, right = part.neighbours(sb)
    sl = left is not None and left.region in SLIDE_REGIONS
    sr = right is not None and right.region in SLIDE_REGIONS
    if not (sl or sr):
        raise NotSlidingOrEscaping(f"s={sb} does not bound a sliding or escaping interval")
    eps = sys.tol.speed
    p = sys.curve.point(sb)
    field_zero = (np.linalg.norm(sys.X(*p)) <= sys.tol.tan or np.linalg.norm(sys.Y(*p)) <= sys.tol.tan)
    vl = _one_sided_speed(sys, sb, -1) if sl else None
    vr = _one_sided_speed(sys, sb, 1) if sr else None
    if field_zero:
        return Extension("ExtendedPseudoEquilibrium", 0, vl, vr)
    if sl and sr:
        zl, zr = abs(vl) <= eps, abs(vr) <= eps
        if not zl and not zr:
            if np.sign(vl) == np.sign(vr):
                return Extension("RegularFlowThrough", int(np.sign(vl)), vl, vr)
            return Extension("NotExtendable", 0, vl, vr)
        if zl and zr:
            h = min(1e-4, 0.25 * (left.hi - left.lo), 0.25 * (right.hi - right.lo))
            wl, wr = sliding_speed(sys, sb - h), sliding_speed(sys, sb + h)
            if np.sign(wl) == np.sign(wr):
                return Extension("ExtendedPseudoEquilibrium", 0, vl, vr)
            return Extension("NotExtendable", 0, vl, vr)
        return Extension("NotExtendable", 0, vl, vr)
    v = vl if sl else vr
    if abs(v) <= eps:
        return Extension("ExtendedPseudoEquilibrium", 0, vl, vr)
    return Extension("RegularFlowThrough", int(np.sign(v)), vl, vr)
