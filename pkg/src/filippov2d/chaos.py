"""Chaotic sets around a parabolic/hyperbolic double tangency.

``construct_lambda`` builds the region swept by the orbits that leave the
escaping side of the tangency and come back to the sliding side; the
tangency itself is the hub through which every point of the region passes.
The probes are numerical witnesses (shooting, backward chaining, grid
coverage), not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import shapely
from shapely.geometry import Polygon
from shapely.ops import unary_union
from scipy.optimize import minimize_scalar

from .errors import DegenerateA12, NotChaoticConfiguration, ProbeBudgetExceeded
from .hybrid import Trajectory, _Run, advance, departs, initial_state, simulate, slide_options
from .integrate import Arc, integrate_arc
from .policy import Choice, Policy
from .sigma import SLIDE_REGIONS, Region
from .system import LinearSpec, PiecewiseSystem

BISECT_ITERS = 30
CLOSE_TOL = 1e-6
GRID = 1e-2
COVERAGE_MIN = 0.99


@dataclass
class LambdaRegion:
    boundary_arcs: list[Arc]
    q_e_plus: float | None      # Y side
    q_e_minus: float | None     # X side
    p_s: float
    p_e: float
    contains_sigma_segment: tuple[float, float]
    kind: str                   # Parabolic | Hyperbolic | Circuit
    polygon: Polygon = field(repr=False)
    tangency_s: float
    hub: tuple[float, float]
    closure_gap: float
    holes: list[Arc] = field(default_factory=list, repr=False)
    landings: dict = field(default_factory=dict)

    @property
    def area(self) -> float:
        return float(self.polygon.area)

    def contains(self, q) -> bool:
        return bool(self.polygon.contains(shapely.Point(q[0], q[1])))

    def summary(self) -> dict:
        return {
            "kind": self.kind, "tangency_s": self.tangency_s, "hub": list(self.hub),
            "q_e_plus": self.q_e_plus, "q_e_minus": self.q_e_minus,
            "p_s": self.p_s, "p_e": self.p_e,
            "sigma_segment": list(self.contains_sigma_segment),
            "closure_gap": self.closure_gap, "area": self.area,
            "boundary_arcs": len(self.boundary_arcs), "holes": len(self.holes),
            "landings": self.landings,
        }


# --- helpers on the partition -------------------------------------------------

def _walk(sys: PiecewiseSystem, s0: float, direction: int, regions) -> float:
    """Far end of the run of ``regions`` intervals next to s0, stopping at
    pseudo-equilibria and curve edges."""
    part = sys.partition
    pes = {pe.s for pe in part.pseudo_equilibria}
    b = s0
    while True:
        left, right = part.neighbours(b)
        iv = right if direction > 0 else left
        if iv is None or iv.region not in regions:
            return b
        b = iv.hi if direction > 0 else iv.lo
        if b in pes or b in (sys.curve.alpha, sys.curve.beta) or b in sys.curve.junctions:
            return b


def _slide_reach(sys: PiecewiseSystem, hub_s: float) -> tuple[int, float]:
    """Direction of the slide leaving the hub and how far it can go."""
    opts = slide_options(sys, hub_s)
    d = opts.get("S", 0)
    if d == 0:
        raise NotChaoticConfiguration(f"no sliding motion leaves the hub at s={hub_s}")
    return d, _walk(sys, hub_s, d, SLIDE_REGIONS)


def _landing(sys, which: str, s: float, t_max: float = 60.0, rtol: float | None = None):
    """Forward orbit of ``which`` from sigma(s) up to its next hit of Sigma."""
    kw = {} if rtol is None else {"rtol": rtol, "atol": rtol}
    arc, ev = integrate_arc(sys.field(which), sys.curve.point(s), t_max, f=sys.f,
                            side=1 if which == "X" else -1, K=sys.K, tol=sys.tol,
                            mode="Flow" + which, **kw)
    if ev.kind != "HitSigma":
        return arc, None
    s_hit, _ = sys.curve.locate(ev.point)
    return arc, float(s_hit)


def _sigma_polyline(sys, s_a: float, s_b: float, n: int = 64) -> np.ndarray:
    return np.array([sys.curve.point(v) for v in np.linspace(s_a, s_b, n)])


def _polygon(points: np.ndarray) -> Polygon:
    poly = Polygon(points)
    if not poly.is_valid:
        poly = shapely.make_valid(poly)
        polys = [g for g in getattr(poly, "geoms", [poly]) if g.geom_type == "Polygon"]
        poly = unary_union(polys)
    return poly


# --- construction -----------------------------------------------------------

def construct_lambda(sys: PiecewiseSystem, tangency_s: float) -> LambdaRegion:
    part = sys.partition
    s_t = part.nearest_breakpoint(tangency_s, 1e-8)
    if s_t is None:
        raise NotChaoticConfiguration(f"s={tangency_s} is not a breakpoint of the partition")
    rep = part.reports[s_t]
    if rep.region is not Region.DOUBLE:
        raise NotChaoticConfiguration(f"s={s_t} is not a double tangency ({rep.region.value})")
    if rep.double_kind not in ("Parabolic", "Hyperbolic"):
        raise NotChaoticConfiguration(f"double tangency at s={s_t} is {rep.double_kind}")
    left, right = part.neighbours(s_t)
    regs = {None if iv is None else iv.region for iv in (left, right)}
    if regs != {Region.SLIDING, Region.ESCAPING}:
        raise NotChaoticConfiguration("the tangency does not separate a sliding and an escaping segment")
    if any(iv.region is Region.SEWING for iv in part.intervals):
        raise NotChaoticConfiguration("crossing segments present in K")
    e_dir = 1 if right.region is Region.ESCAPING else -1
    p_e = _walk(sys, s_t, e_dir, (Region.ESCAPING,))
    p_s = _walk(sys, s_t, -e_dir, (Region.SLIDING,))
    lo_s, hi_s = sorted((p_s, s_t))

    def lands_sliding(which, q):
        _, l = _landing(sys, which, q)
        return l is not None and lo_s <= l < hi_s if e_dir > 0 else l is not None and lo_s < l <= hi_s

    pieces, arcs, landings, q_e = [], [], {}, {}
    for which in ("X", "Y"):
        q = _sup_hit(lambda v: lands_sliding(which, v), s_t, p_e)
        q_e[which] = q
        if q is None:
            continue
        arc, l = _landing(sys, which, q)
        landings[which] = l
        pts = np.vstack([arc.dense_points(8), _sigma_polyline(sys, l, q)])
        pieces.append(_polygon(pts))
        arcs.append(arc)
    if not pieces:
        raise NotChaoticConfiguration("no orbit from the escaping side returns to the sliding side")
    region = unary_union(pieces)

    holes = []
    p_t = sys.curve.point(s_t)
    for which in ("X", "Y"):
        if not departs(sys, which, p_t):
            continue
        arc, r = _landing(sys, which, s_t)
        if r is None:
            continue
        pts = np.vstack([arc.dense_points(8), _sigma_polyline(sys, r, s_t, 16)])
        hole = _polygon(pts)
        if hole.area > 0:
            region = region.difference(hole)
            holes.append(arc)
    if region.area <= 1e-9:
        raise NotChaoticConfiguration("the constructed region has empty interior")
    gap = _closure_gap(sys, arcs + holes)
    seg = [q for q in q_e.values() if q is not None] + list(landings.values())
    return LambdaRegion(arcs, q_e["Y"], q_e["X"], p_s, p_e, (min(seg), max(seg)),
                        rep.double_kind, region, s_t, tuple(map(float, p_t)), gap, holes, landings)


def _sup_hit(pred, s_t: float, p_e: float, n_grid: int = 24) -> float | None:
    """Largest q in (s_t, p_e] (towards p_e) with pred(q), by grid + bisection."""
    pad = 1e-9 * max(1.0, abs(p_e - s_t))
    far = p_e - math.copysign(pad, p_e - s_t)
    if pred(far):
        return far
    grid = np.linspace(s_t, far, n_grid + 1)[1:]
    good = None
    for k, g in enumerate(grid):
        if pred(g):
            good = k
    if good is None:
        return None
    a, b = grid[good], grid[good + 1] if good + 1 < len(grid) else far
    for _ in range(BISECT_ITERS):
        m = 0.5 * (a + b)
        if pred(m):
            a = m
        else:
            b = m
    return float(a)


def _closure_gap(sys, arcs) -> float:
    gap = 0.0
    for arc in arcs:
        for p in (arc.start, arc.end):
            _, d = sys.curve.locate(p)
            gap = max(gap, d)
    return float(gap)


def circuit_region(sys: PiecewiseSystem, hub, outer_script: str = "X", inner_field: str = "Y",
                   t_budget: float = 60.0) -> LambdaRegion:
    """Region enclosed by a scripted circuit through ``hub`` and the orbit of
    ``inner_field`` leaving the hub; the hub is where the two meet."""
    hub_s, d = sys.curve.locate(hub)
    if d > 1e-8:
        raise NotChaoticConfiguration("hub is not on the switching curve")
    hub_s = sys.partition.nearest_breakpoint(hub_s, 1e-8) or hub_s
    run = _Run(sys, Policy().start(), t_budget)
    st, _ = advance(sys, ("Sigma", hub_s, None), run, forced=inner_field)
    st, _ = advance(sys, st, run)
    if st[0] != "Sigma":
        raise NotChaoticConfiguration("the inner orbit does not return to the switching curve")
    inner = run.arcs[0]
    e_s = st[1]
    outer_traj = simulate(sys, hub, t_budget, Policy.scripted(outer_script, repeat=True), max_arcs=40)
    outer = []
    for arc in outer_traj.arcs:
        outer.append(arc)
        ev = arc.exit_event
        if ev is not None and ev.s is not None and abs(ev.s - e_s) <= 1e-7:
            break
    else:
        raise NotChaoticConfiguration("the scripted circuit never meets the end of the inner orbit")
    pts = np.vstack([a.dense_points(8) for a in outer] + [inner.dense_points(8)[::-1]])
    poly = _polygon(pts)
    gap = max(np.linalg.norm(outer[0].start - inner.start), np.linalg.norm(outer[-1].end - inner.end),
              *[np.linalg.norm(a.end - b.start) for a, b in zip(outer, outer[1:])])
    p = sys.curve.point(hub_s)
    return LambdaRegion(outer + [inner], None, None, hub_s, e_s, tuple(sorted((hub_s, e_s))),
                        "Circuit", poly, hub_s, (float(p[0]), float(p[1])), float(gap))


# --- conditions ------------------------------------------------------------

def chaos_conditions(sys: PiecewiseSystem, *, seeds: int = 8, t_budget: float = 150.0) -> dict:
    part = sys.partition
    doubles = [r for r in part.reports.values() if r.region is Region.DOUBLE]
    ph = [r for r in doubles if r.double_kind in ("Parabolic", "Hyperbolic")]
    no_crossing = not any(iv.region is Region.SEWING for iv in part.intervals)
    witness = None
    if ph:
        witness = _two_sided_witness(sys, ph[0].s, seeds, t_budget)
    return {
        "double_tangency": bool(doubles),
        "parabolic_or_hyperbolic": bool(ph),
        "no_crossing_in_K": no_crossing,
        "two_sided_visits_witness": witness is not None,
        "witness": witness,
    }


def _two_sided_witness(sys, s_t, seeds, t_budget):
    for seed in range(seeds):
        traj = simulate(sys, sys.curve.point(s_t), t_budget, Policy.seeded(seed))
        regs = _slide_regions(sys, traj)
        if Region.SLIDING in regs and Region.ESCAPING in regs:
            return {"seed": seed, "policy": traj.policy, "sliding_visits": regs.count(Region.SLIDING),
                    "escaping_visits": regs.count(Region.ESCAPING)}
    return None


def _slide_regions(sys, traj: Trajectory) -> list:
    out = []
    for a in traj.arcs:
        if a.mode == "Slide" and a.t1 > a.t0:
            s_mid, _ = sys.curve.locate(a.samples[len(a.samples) // 2, 1:])
            out.append(sys.partition.region_at(s_mid))
    return out


def linear_chaos_conditions(spec: LinearSpec, tan_tol: float = 1e-9) -> dict:
    """Coefficient conditions for chaos in the linear case, evaluated exactly."""
    ex = spec.exact()
    a12p, a22p = ex.A_plus[0][1], ex.A_plus[1][1]
    a12m, a22m = ex.A_minus[0][1], ex.A_minus[1][1]
    b1p, b2p = ex.b_plus
    b1m, b2m = ex.b_minus
    if a12p == 0 or a12m == 0:
        raise DegenerateA12("a12 must be non-zero on both sides")
    c1 = a12m * b1p - a12p * b1m
    c2m = a12m * b2m - a22m * b1m
    c2p = a12p * b2p - a22p * b1p
    c3 = a12p * a12m
    tp, tm = -b1p / a12p, -b1m / a12m
    geom = abs(float(tp - tm)) <= tan_tol
    return {
        "i": c1 == 0, "i_value": c1,
        "ii": c2m < 0 or c2p > 0, "ii_values": (c2m, c2p),
        "iii": c3 < 0, "iii_value": c3,
        "tangency_plus": (Fraction(0), tp), "tangency_minus": (Fraction(0), tm),
        "i_geometric": geom, "consistent": geom == (c1 == 0),
    }


# --- probes ------------------------------------------------------------------

def _closest(arcs, q) -> float:
    q = np.asarray(q, float)
    best, where = math.inf, None
    for arc in arcs:
        for lo, hi, fn in arc.pieces or []:
            ts = np.linspace(lo, hi, 17)
            d = np.linalg.norm(np.asarray(fn(ts)).T - q, axis=1)
            i = int(np.argmin(d))
            if d[i] < best:
                best, where = float(d[i]), (ts[max(i - 1, 0)], ts[min(i + 1, 16)], fn)
        if not arc.pieces:
            d = float(np.min(np.linalg.norm(arc.samples[:, 1:] - q, axis=1)))
            best = min(best, d)
    if where is not None:
        a, b, fn = where
        if b > a:
            r = minimize_scalar(lambda t: np.linalg.norm(np.asarray(fn(t)).ravel() - q),
                                bounds=(a, b), method="bounded", options={"xatol": 1e-14})
            best = min(best, float(r.fun))
    return best


def reach_hub(sys, q, hub_s: float, t_budget: float = 150.0) -> tuple[bool, list[Arc]]:
    """Forward run from q (staying on the curve whenever allowed) until it meets the hub."""
    run = _Run(sys, Policy.stay_sliding().start(), t_budget)
    st = initial_state(sys, q)
    for _ in range(200):
        if st[0] == "Sigma" and abs(st[1] - hub_s) <= 1e-9:
            return True, run.arcs
        if st[0] == "Done":
            break
        st, _ = advance(sys, st, run)
    return False, run.arcs


def backward_chain(sys, q, reach: tuple[float, float], max_links: int = 8):
    """Follow q backwards, switching field at crossing points, until a point of
    the hub's slide range is met.  Returns (s_b, exit_field, links) or None."""
    lo, hi = reach
    p = np.asarray(q, float)
    which = "X" if sys.f(*p) > 0 else "Y"
    part = sys.partition
    for links in range(1, max_links + 1):
        arc, ev = integrate_arc(sys.field(which), p, 100.0, f=sys.f,
                                side=1 if which == "X" else -1, K=sys.K, tol=sys.tol,
                                direction=-1)
        if ev.kind != "HitSigma":
            return None
        s, _ = sys.curve.locate(ev.point)
        if lo - 1e-9 <= s <= hi + 1e-9:
            return float(s), which, links
        if part.region_at(s) is not Region.SEWING:
            return None
        which = "Y" if which == "X" else "X"
        p = sys.curve.point(s)
    return None


def hub_to(sys, hub_s: float, s_b: float, which: str, links: int, q, t_budget: float = 150.0):
    """Slide from the hub, leave at s_b with ``which`` and follow ``links`` smooth arcs."""
    run = _Run(sys, Policy.stay_sliding().start(), t_budget)
    if abs(s_b - hub_s) <= 1e-9:
        choice = Choice(which)
    else:
        choice = Choice("S", None, which, float(s_b))
    st, _ = advance(sys, ("Sigma", hub_s, None), run, forced=choice)
    flows = []
    for _ in range(4 * links + 8):
        if st[0] == "Done":
            break
        st, arc = advance(sys, st, run)
        if arc is not None and arc.mode != "Slide":
            flows.append(arc)
            if len(flows) >= links:
                break
    return _closest(flows, q), run.arcs


def sample_interior(region: LambdaRegion, n: int, seed: int, margin: float = 1e-3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    inner = region.polygon.buffer(-margin)
    if inner.is_empty:
        raise ProbeBudgetExceeded(f"no interior left after a margin of {margin}")
    x0, y0, x1, y1 = inner.bounds
    out = []
    for _ in range(2000 * max(n, 1)):
        if len(out) == n:
            break
        p = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        if inner.contains(shapely.Point(p)):
            out.append(p)
    if len(out) < n:
        raise ProbeBudgetExceeded(f"found only {len(out)} of {n} interior samples")
    return np.array(out)


def _hub_reach(sys, region: LambdaRegion):
    d, end = _slide_reach(sys, region.tangency_s)
    return tuple(sorted((region.tangency_s, end)))


def hub_sweep_coverage(sys, region: LambdaRegion, n_exits: int = 600, grid: float = GRID) -> dict:
    """Share of interior grid cells met by the orbits leaving the hub's slide."""
    lo, hi = _hub_reach(sys, region)
    pts = [_sigma_polyline(sys, lo, hi, 400)]
    exits = np.linspace(lo, hi, n_exits + 2)[1:-1]
    for which in ("X", "Y"):
        for s in exits:
            if not departs(sys, which, sys.curve.point(s)):
                continue
            arc, _ = _landing(sys, which, float(s), rtol=1e-9)
            pts.append(_fine_points(arc, grid / 3))
    pts = np.vstack(pts)
    x0, y0, x1, y1 = region.polygon.bounds
    nx, ny = int(math.ceil((x1 - x0) / grid)), int(math.ceil((y1 - y0) / grid))
    cx = x0 + (np.arange(nx) + 0.5) * grid
    cy = y0 + (np.arange(ny) + 0.5) * grid
    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    interior = shapely.contains_xy(region.polygon.buffer(-grid), gx, gy)
    ix = np.floor((pts[:, 0] - x0) / grid).astype(int)
    iy = np.floor((pts[:, 1] - y0) / grid).astype(int)
    ok = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
    hit = np.zeros((nx, ny), bool)
    hit[ix[ok], iy[ok]] = True
    n_int = int(interior.sum())
    n_cov = int((hit & interior).sum())
    return {"interior_cells": n_int, "covered_cells": n_cov,
            "coverage": n_cov / n_int if n_int else 0.0, "exits": n_exits}


def _fine_points(arc: Arc, spacing: float) -> np.ndarray:
    out = [arc.samples[:1, 1:]]
    for lo, hi, fn in arc.pieces:
        a, b = np.asarray(fn(lo)).ravel(), np.asarray(fn(hi)).ravel()
        n = max(2, int(math.ceil(np.linalg.norm(b - a) / spacing * 1.6)) + 1)
        out.append(np.asarray(fn(np.linspace(lo, hi, n))).T)
    return np.vstack(out)


def theorem2_probes(sys: PiecewiseSystem, region: LambdaRegion, n_samples: int = 20, seed: int = 0,
                    *, samples=None, coverage: dict | None = None) -> dict:
    """Periodicity, recurrence and density witnesses for sampled points of the region."""
    if samples is None:
        samples = sample_interior(region, n_samples, seed)
    for q in samples:
        if not region.contains(q):
            raise ValueError(f"sample {tuple(q)} lies outside the region")
    reach = _hub_reach(sys, region)
    cov = coverage or hub_sweep_coverage(sys, region)
    rows = []
    for q in samples:
        q = tuple(map(float, q))
        to_hub, arcs_in = reach_hub(sys, q, region.tangency_s)
        chain = backward_chain(sys, q, reach)
        gap, arcs_out = (math.inf, [])
        if chain is not None:
            gap, arcs_out = hub_to(sys, region.tangency_s, chain[0], chain[1], chain[2], q)
        regs = _slide_regions(sys, Trajectory(arcs_in + arcs_out, [], [], None))
        both = Region.SLIDING in regs and Region.ESCAPING in regs
        a = to_hub and gap <= CLOSE_TOL
        rows.append({"q": list(q), "reaches_hub": to_hub, "chain": chain, "closure_gap": gap,
                     "a": a, "c": a and both, "d": a and both})
    res = {k: all(r[k] for r in rows) for k in ("a", "c", "d")}
    res["b"] = cov["coverage"] >= COVERAGE_MIN and all(r["reaches_hub"] for r in rows)
    res.update({"coverage": cov, "samples": rows, "passed": all(res[k] for k in "abcd")})
    return res


def minimality_probe(sys: PiecewiseSystem, region: LambdaRegion, hub=None, n_samples: int = 20,
                     seed: int = 0, *, samples=None) -> dict:
    """Every sample reaches the hub forward and the hub reaches every sample forward."""
    hub_s = region.tangency_s
    if hub is not None:
        s, d = sys.curve.locate(hub)
        if d > 1e-8:
            raise ValueError("hub must lie on the switching curve")
        hub_s = sys.partition.nearest_breakpoint(s, 1e-8) or s
    if samples is None:
        samples = sample_interior(region, n_samples, seed)
    d, end = _slide_reach(sys, hub_s)
    reach = tuple(sorted((hub_s, end)))
    not_to, not_from = [], []
    for q in samples:
        q = tuple(map(float, q))
        ok, _ = reach_hub(sys, q, hub_s)
        if not ok:
            not_to.append(q)
        chain = backward_chain(sys, q, reach)
        gap = hub_to(sys, hub_s, *chain, q)[0] if chain is not None else math.inf
        if gap > CLOSE_TOL:
            not_from.append(q)
    return {"passed": not not_to and not not_from, "hub": list(map(float, sys.curve.point(hub_s))),
            "samples": len(samples), "unreachable_to_hub": not_to,
            "unreachable_from_hub": not_from}


__all__ = [
    "LambdaRegion", "construct_lambda", "circuit_region", "chaos_conditions",
    "linear_chaos_conditions", "theorem2_probes", "minimality_probe", "hub_sweep_coverage",
]
