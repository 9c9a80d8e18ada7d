"""Omega-limit classification of simulated maximal trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NotChaoticConfiguration
from .hybrid import Trajectory, arrives, options_at
from .io import jsonable
from .sigma import SLIDE_REGIONS, Region, sliding_speed
from .system import PiecewiseSystem, equilibria
from .tolerances import Tolerances

VERDICTS = (
    "EquilibriumX", "EquilibriumY", "PeriodicOrbitX", "PeriodicOrbitY", "GraphXorY",
    "PseudoEquilibrium", "PseudoCycle", "MildPseudoCycle", "PseudoGraph",
    "TangencyTypeI", "TangencyTypeII", "ChaoticTypeIII", "Undetermined",
)


@dataclass
class ReturnEvent:
    s: float
    region: str
    mode_in: str | None
    mode_out: str | None
    t: float
    kind: str
    detail: str = ""

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.region}:{self.mode_in}>{self.mode_out}"


@dataclass
class OmegaReport:
    verdict: str
    kind: str | None = None
    evidence: dict = field(default_factory=dict)
    lam: object = None  # LambdaRegion for chaotic verdicts

    @property
    def tag(self) -> str:
        return f"{self.verdict}({self.kind})" if self.kind else self.verdict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "kind": self.kind, "tag": self.tag,
                "evidence": jsonable(self.evidence)}


def _region_label(sys: PiecewiseSystem, s: float) -> str:
    part = sys.partition
    b = part.nearest_breakpoint(s, 1e-12)
    if b is not None:
        return part.reports[b].region.value
    r = part.region_at(s)
    return r.value if r else "Outside"


def return_sequence(sys: PiecewiseSystem, traj: Trajectory) -> list[ReturnEvent]:
    """Sigma events of the trajectory in order, with region and mode labels."""
    ends = {id(a.exit_event): i for i, a in enumerate(traj.arcs) if a.exit_event is not None}
    out = []
    kinds = ("Start", "HitSigma", "SlideBreakpoint", "DwellExit")
    for k, ev in enumerate(traj.events):
        if ev.kind not in kinds or ev.s is None:
            continue
        i = ends.get(id(ev))
        mode_in = traj.arcs[i].mode if i is not None else None
        j = (i + 1) if i is not None else _first_arc_after(traj, ev.time)
        mode_out = traj.arcs[j].mode if j is not None and j < len(traj.arcs) else None
        out.append(ReturnEvent(float(ev.s), _region_label(sys, ev.s), mode_in, mode_out,
                               ev.time, ev.kind, ev.detail))
    return out


def _first_arc_after(traj, t):
    for i, a in enumerate(traj.arcs):
        if a.t0 >= t - 1e-12:
            return i
    return None


# --- classification ------------------------------------------------------------

def classify_omega(sys: PiecewiseSystem, traj: Trajectory, tol: Tolerances | None = None,
                   *, build_lambda: bool = True) -> OmegaReport:
    tol = tol or sys.tol
    term = traj.terminal
    if term.kind == "ReachPseudoEq":
        pes = sys.partition.pseudo_equilibria
        near = min(pes, key=lambda pe: abs(pe.s - term.s)) if pes else None
        ev = {"terminal": term.to_dict(), "speed": sliding_speed(sys, term.s)}
        if near is not None:
            ev["pseudo_equilibrium"] = near.to_dict()
        return OmegaReport("PseudoEquilibrium", None, ev)
    if term.kind == "ReachTypeII":
        return OmegaReport("TangencyTypeII", None, {"terminal": term.to_dict()})
    if term.kind == "DeadEnd":
        if term.detail == "TypeI":
            return OmegaReport("TangencyTypeI", None, {"terminal": term.to_dict()})
        return OmegaReport("Undetermined", None, {"reason": "dead end", "terminal": term.to_dict()})
    if term.kind == "ExitK":
        return OmegaReport("Undetermined", None, {"reason": "ExitK", "terminal": term.to_dict()})

    seq = return_sequence(sys, traj)
    smooth = _smooth_tail(sys, traj, seq, tol)
    if smooth is not None:
        return smooth
    cyc = _periodic_signature(seq, tol)
    if cyc is not None:
        return _cycle_report(sys, traj, seq, cyc, tol)
    pg = _pseudo_graph(sys, seq)
    if pg is not None:
        return pg
    ch = _chaotic(sys, traj, seq, build_lambda)
    if ch is not None:
        return ch
    return OmegaReport("Undetermined", None, {"reason": "no criterion matched",
                                               "n_sigma_events": len(seq)})


# smooth omega-limits ------------------------------------------------------------

def _smooth_tail(sys, traj, seq, tol):
    if not traj.arcs:
        return None
    last = traj.arcs[-1]
    if last.mode == "Slide":
        return None
    total = traj.duration
    t_last_sigma = seq[-1].t if seq else 0.0
    tail = total - max(t_last_sigma, last.t0)
    if seq and tail < max(0.3 * total, 20.0):
        return None
    which = last.mode[-1]
    F = sys.field(which)
    p_end = last.end
    v = F(*p_end)
    eqs = equilibria(F, sys.K, sys.tol)
    if np.linalg.norm(v) <= 1e-6:
        near = min(eqs, key=lambda q: math.dist(q, p_end)) if eqs else tuple(p_end)
        return OmegaReport("Equilibrium" + which, None,
                           {"limit_point": list(near), "final_speed": float(np.linalg.norm(v)),
                            "distance": math.dist(near, p_end)})
    crossings = _section_returns(last, p_end, v)
    ev = {"returns": len(crossings)}
    if len(crossings) >= 4:
        pts = np.array([c[1] for c in crossings])
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        ev["last_gaps"] = gaps[-3:].tolist()
        if np.all(gaps[-3:] < tol.cycle):
            period = crossings[-1][0] - crossings[-2][0]
            return OmegaReport("PeriodicOrbit" + which, None,
                               {**ev, "period": period, "point": pts[-1].tolist()})
    saddles = [q for q in eqs if _is_saddle(F, q)]
    if saddles and len(crossings) >= 3:
        pts = last.dense_points()
        d = [min(np.linalg.norm(pts - np.asarray(q), axis=1)) for q in saddles]
        if min(d) < 1e-2:
            return OmegaReport("GraphXorY", None, {**ev, "saddle": list(saddles[int(np.argmin(d))]),
                                                   "closest_approach": min(d)})
    return OmegaReport("Undetermined", None, {**ev, "reason": "smooth tail without a detected limit"})


def _is_saddle(F, q) -> bool:
    (ux, uy), (vx, vy) = F.jacobian()
    det = ux(*q) * vy(*q) - uy(*q) * vx(*q)
    return det < 0


def _section_returns(arc, p_end, v):
    """Crossings of the line through p_end normal to v, in the direction of v."""
    n = v / np.linalg.norm(v)
    out = []
    for lo, hi, fn in arc.pieces:
        ts = np.linspace(lo, hi, 9)
        ps = np.asarray(fn(ts)).T
        g = (ps - p_end) @ n
        for i in range(len(ts) - 1):
            if g[i] < 0 <= g[i + 1]:
                t = brentq(lambda t: (np.asarray(fn(t)).ravel() - p_end) @ n, ts[i], ts[i + 1],
                           xtol=1e-14) if g[i + 1] != 0 else ts[i + 1]
                p = np.asarray(fn(t)).ravel()
                # only crossings near p_end count as returns to the section
                out.append((float(t), p))
    if not out:
        return out
    scale = max(np.linalg.norm(out[-1][1] - p_end), 1e-12)
    ref = out[-1][1]
    size = np.ptp(arc.samples[:, 1:], axis=0).max()
    return [c for c in out if np.linalg.norm(c[1] - ref) < 0.25 * size + scale]


# periodic Sigma signatures ------------------------------------------------------

def _periodic_signature(seq, tol):
    n = len(seq)
    for k in range(1, n // 3 + 1):
        ok = True
        for i in range(n - 2 * k, n):
            a, b = seq[i], seq[i - k]
            if a.label != b.label or abs(a.s - b.s) >= tol.cycle:
                ok = False
                break
        if ok:
            return k
    return None


_MODE_OPTION = {"FlowX": "X", "FlowY": "Y", "Slide": "S"}


def _cycle_report(sys, traj, seq, k, tol):
    period = seq[-k:]
    t_start = seq[-k - 1].t if len(seq) > k else seq[-k].t
    t_end = seq[-1].t
    arcs = [a for a in traj.arcs if a.t0 >= t_start - 1e-12 and a.t1 <= t_end + 1e-12]
    part = sys.partition
    slide_regions = []
    for a in arcs:
        if a.mode == "Slide":
            s_mid, _ = sys.curve.locate(a.samples[len(a.samples) // 2, 1:])
            slide_regions.append(part.region_at(s_mid))
    tangencies = set(part.tangencies.get("X", []) + part.tangencies.get("Y", []))
    touches_tangency = any("tangential" in e.detail or any(abs(e.s - t) <= 1e-9 for t in tangencies)
                           for e in period)
    if any(a.mode == "Slide" for a in arcs):
        kind = "Sliding"
    elif touches_tangency:
        kind = "Tangent"
    else:
        kind = "Crossing"

    # invariance: some extra forward option (positive) / extra arrival (negative)
    pos_fail = Region.ESCAPING in slide_regions
    neg_fail = Region.SLIDING in slide_regions
    for e in period:
        p = sys.curve.point(e.s)
        opts, _ = options_at(sys, e.s)
        chosen = _MODE_OPTION.get(e.mode_out)
        extra = [o for o in opts if not (o == chosen or (chosen == "S" and o.startswith("S")))]
        if extra:
            pos_fail = True
        incoming = {w for w in ("X", "Y") if arrives(sys, w, p)}
        if _slide_arrival(sys, e.s):
            incoming.add("S")
        if incoming - {_MODE_OPTION.get(e.mode_in)}:
            neg_fail = True
    invariant = not (pos_fail and neg_fail)
    # properness: the same point met twice inside one period closes a shorter loop
    proper = True
    for i in range(len(period)):
        for j in range(i + 1, len(period)):
            if abs(period[i].s - period[j].s) < tol.cycle:
                proper = False
    gap = max(abs(seq[i].s - seq[i - k].s) for i in range(len(seq) - 2 * k, len(seq)))
    evidence = {
        "period_events": k,
        "signature": [e.label for e in period],
        "s_values": [e.s for e in period],
        "rehit_distance": gap,
        "cycle_time": t_end - (seq[-k - 1].t if len(seq) > k else seq[0].t),
        "positively_invariant": not pos_fail,
        "negatively_invariant": not neg_fail,
        "proper": proper,
        "modes": sorted({a.mode for a in arcs}),
    }
    on_cycle = _special_points_on(sys, arcs)
    if on_cycle:
        evidence["special_points"] = on_cycle
        return OmegaReport("PseudoGraph", None, evidence)
    if invariant and proper:
        return OmegaReport("PseudoCycle", kind, evidence)
    mild = "I" if not invariant and proper else "II" if invariant else "III"
    evidence["cycle_kind"] = kind
    return OmegaReport("MildPseudoCycle", mild, evidence)


def _slide_arrival(sys, s) -> bool:
    part = sys.partition
    b = part.nearest_breakpoint(s, 1e-12)
    eps = sys.tol.speed
    if b is None:
        iv = part.interval_at(s)
        return iv is not None and iv.region in SLIDE_REGIONS and abs(sliding_speed(sys, s)) > eps
    from .sigma import _one_sided_speed
    left, right = part.neighbours(b)
    if left is not None and left.region in SLIDE_REGIONS and _one_sided_speed(sys, b, -1) > eps:
        return True
    if right is not None and right.region in SLIDE_REGIONS and _one_sided_speed(sys, b, 1) < -eps:
        return True
    return False


def _special_points_on(sys, arcs, within: float = 1e-6) -> list:
    pts = np.vstack([a.dense_points() for a in arcs]) if arcs else np.zeros((0, 2))
    found = []
    if not len(pts):
        return found
    cands = [("pseudo-equilibrium", pe.point) for pe in sys.partition.pseudo_equilibria]
    for w in ("X", "Y"):
        cands += [(f"equilibrium of {w}", q) for q in equilibria(sys.field(w), sys.K, sys.tol)]
    for name, q in cands:
        d = float(np.min(np.linalg.norm(pts - np.asarray(q), axis=1)))
        if d <= within:
            found.append({"kind": name, "point": list(q), "distance": d})
    return found


# pseudo-graphs by monotone convergence of returns ---------------------------------

def _pseudo_graph(sys, seq, min_len: int = 6):
    targets = [("pseudo-equilibrium", pe.s) for pe in sys.partition.pseudo_equilibria]
    for w in ("X", "Y"):
        for q in equilibria(sys.field(w), sys.K, sys.tol):
            s, d = sys.curve.locate(q)
            if d <= 1e-8:
                targets.append((f"equilibrium of {w}", s))
    if not targets:
        return None
    groups: dict[str, list[float]] = {}
    for e in seq:
        groups.setdefault(e.label, []).append(e.s)
    for label, vals in groups.items():
        if len(vals) < min_len:
            continue
        v = np.array(vals[-min_len:])
        d = np.diff(v)
        if not (np.all(d > 0) or np.all(d < 0)):
            continue
        if not np.all(np.abs(d[1:]) < np.abs(d[:-1])):
            continue
        # Aitken extrapolation of the limit
        den = d[-1] - d[-2]
        limit = v[-1] - d[-1] ** 2 / den if den != 0 else v[-1]
        for name, s_t in targets:
            if abs(limit - s_t) <= 1e-3 and abs(v[-1] - s_t) < abs(v[0] - s_t):
                return OmegaReport("PseudoGraph", None, {
                    "label": label, "returns": v.tolist(), "extrapolated_limit": float(limit),
                    "limit_kind": name, "limit_s": s_t})
    return None


# chaotic sets of type III ------------------------------------------------------

def _chaotic(sys, traj, seq, build_lambda: bool, min_visits: int = 3):
    part = sys.partition
    doubles = [r for r in part.reports.values()
               if r.region is Region.DOUBLE and r.double_kind in ("Parabolic", "Hyperbolic")]
    if not doubles:
        return None
    t_half = 0.5 * traj.duration
    n_s = n_e = 0
    for a in traj.arcs:
        if a.mode != "Slide" or a.t1 < t_half or a.t1 - a.t0 <= 0:
            continue
        s_mid, _ = sys.curve.locate(a.samples[len(a.samples) // 2, 1:])
        r = part.region_at(s_mid)
        n_s += r is Region.SLIDING
        n_e += r is Region.ESCAPING
    if n_s < min_visits or n_e < min_visits:
        return None
    t = doubles[0]
    ev = {"sliding_visits": n_s, "escaping_visits": n_e, "tangency_s": t.s,
          "tangency_point": list(t.point), "double_kind": t.double_kind}
    lam = None
    if build_lambda:
        from .chaos import construct_lambda
        try:
            lam = construct_lambda(sys, t.s)
        except NotChaoticConfiguration as exc:
            return OmegaReport("Undetermined", None, {**ev, "reason": f"Lambda construction failed: {exc}"})
        ev["lambda"] = lam.summary()
    return OmegaReport("ChaoticTypeIII", None, ev, lam)
