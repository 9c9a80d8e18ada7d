"""Maximal trajectories as concatenations of X-arcs, Y-arcs and sliding arcs.

The run is a small state machine.  States are

* ``("Sigma", s, arrived_with)``: on the switching curve, deciding what next;
* ``("FlowX" | "FlowY", point, entry_event)``: about to integrate a smooth arc;
* ``("Slide", s, direction, choice)``: about to slide along the curve;
* ``("Done", event)``: terminal.

Non-determinism only arises in ``Sigma`` states with two or more legal
continuations; those are resolved by the policy and logged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BudgetExceeded, DeadEnd, NotSlidingOrEscaping
from .integrate import Arc, EventRecord, integrate_arc
from .policy import Choice, Policy, PolicyState
from .sigma import SLIDE_REGIONS, Region, classify_point, extend_filippov, sliding_speed
from .sigma import _one_sided_speed
from .system import INF_ORDER, PiecewiseSystem, order_at

SNAP_TAN = 1e-6     # hits this close to a tangency breakpoint are snapped onto it
MAX_ARCS = 10_000
MAX_DEPTH = 12


@dataclass
class Trajectory:
    arcs: list[Arc]
    events: list[EventRecord]
    policy_log: list[EventRecord]
    terminal: EventRecord
    policy: str = ""

    @property
    def modes(self) -> list[str]:
        return [a.mode for a in self.arcs]

    def sigma_events(self) -> list[EventRecord]:
        return [e for e in self.events if e.s is not None and e.kind in
                ("HitSigma", "SlideBreakpoint", "DwellExit", "Start")]

    def junction_gaps(self) -> list[float]:
        return [float(np.linalg.norm(a.end - b.start)) for a, b in zip(self.arcs, self.arcs[1:])]

    def rows(self):
        """(t, x, y, mode, arc_index, event_flag) rows for CSV output."""
        for k, arc in enumerate(self.arcs):
            n = len(arc.samples)
            for i, (t, x, y) in enumerate(arc.samples):
                flag = ""
                if i == 0 and arc.entry_event is not None:
                    flag = arc.entry_event.kind
                if i == n - 1 and arc.exit_event is not None:
                    flag = arc.exit_event.kind
                yield (t, x, y, arc.mode, k, flag)

    def log_keys(self) -> list[str]:
        return [e.key() for e in self.events] + ["TERMINAL " + self.terminal.key()]

    @property
    def duration(self) -> float:
        return self.arcs[-1].t1 if self.arcs else 0.0


# --- local rules -------------------------------------------------------------

def departs(sys: PiecewiseSystem, which: str, p) -> bool:
    """Does the forward orbit of ``which`` through p enter its own half-plane?"""
    n, sign = order_at(sys.tower(which), p, sys.tol.tan)
    if n == INF_ORDER:
        return False
    return sign > 0 if which == "X" else sign < 0


def arrives(sys: PiecewiseSystem, which: str, p) -> bool:
    """Does the backward orbit of ``which`` through p lie in its own half-plane?"""
    n, sign = order_at(sys.tower(which), p, sys.tol.tan)
    if n == INF_ORDER:
        return False
    val = sign * (-1) ** int(n)
    return val > 0 if which == "X" else val < 0


def _breakpoint(sys: PiecewiseSystem, s: float, within: float = 1e-12):
    return sys.partition.nearest_breakpoint(s, within)


def _is_edge(sys: PiecewiseSystem, b: float) -> bool:
    c = sys.curve
    return b == c.alpha or b == c.beta or b in c.junctions


def slide_options(sys: PiecewiseSystem, s: float) -> dict[str, int]:
    """Sliding continuations at s: {"S": direction} (0 = stay put), maybe "S-"."""
    part = sys.partition
    b = _breakpoint(sys, s)
    eps = sys.tol.speed
    if b is None:
        iv = part.interval_at(s)
        if iv is None or iv.region not in SLIDE_REGIONS:
            return {}
        v = sliding_speed(sys, s)
        return {"S": 0 if abs(v) <= eps else int(np.sign(v))}
    if _is_edge(sys, b):
        return {}
    if any(pe.s == b for pe in part.pseudo_equilibria):
        return {"S": 0}
    left, right = part.neighbours(b)
    dirs = []
    if right is not None and right.region in SLIDE_REGIONS and _one_sided_speed(sys, b, 1) > eps:
        dirs.append(1)
    if left is not None and left.region in SLIDE_REGIONS and _one_sided_speed(sys, b, -1) < -eps:
        dirs.append(-1)
    if not dirs:
        if (left is not None and left.region in SLIDE_REGIONS) or (right is not None and right.region in SLIDE_REGIONS):
            if extend_filippov(sys, b).kind == "ExtendedPseudoEquilibrium":
                return {"S": 0}
        return {}
    out = {"S": dirs[0]}
    if len(dirs) == 2:
        out["S-"] = dirs[1]
    return out


def options_at(sys: PiecewiseSystem, s: float) -> tuple[list[str], dict[str, int]]:
    p = sys.curve.point(s)
    opts = [w for w in ("X", "Y") if departs(sys, w, p)]
    sl = slide_options(sys, s)
    return opts + list(sl), sl


# --- the runner --------------------------------------------------------------

@dataclass
class _Run:
    sys: PiecewiseSystem
    policy: PolicyState | None
    t_budget: float
    t: float = 0.0
    arcs: list = field(default_factory=list)
    events: list = field(default_factory=list)
    policy_log: list = field(default_factory=list)

    def remaining(self) -> float:
        return self.t_budget - self.t

    def log(self, ev: EventRecord) -> EventRecord:
        self.events.append(ev)
        return ev


def _snap(sys: PiecewiseSystem, s: float, tangential: bool = False) -> float:
    part = sys.partition
    tang = part.tangencies.get("X", []) + part.tangencies.get("Y", [])
    for b in part.breakpoints:
        if abs(b - s) <= sys.tol.tan:
            return b
    for b in tang:
        if abs(b - s) <= SNAP_TAN:
            return part.nearest_breakpoint(b, 1e-9) or b
    return s


def initial_state(sys: PiecewiseSystem, p0) -> tuple:
    p0 = np.asarray(p0, float)
    fv = sys.f(p0[0], p0[1])
    if abs(fv) <= sys.tol.on_sigma:
        s, d = sys.curve.locate(p0)
        if d <= 1e-6:
            return ("Sigma", _snap(sys, s), None)
    return ("FlowX" if fv > 0 else "FlowY", p0, None)


def advance(sys: PiecewiseSystem, state: tuple, run: _Run, forced: str | Choice | None = None):
    """One transition; returns (next_state, arc or None)."""
    kind = state[0]
    if kind == "Sigma":
        return _decide(sys, state, run, forced), None
    if kind in ("FlowX", "FlowY"):
        return _flow(sys, state, run)
    if kind == "Slide":
        return _slide(sys, state, run)
    raise ValueError(f"cannot advance from {kind}")


def _decide(sys, state, run: _Run, forced=None):
    _, s, arrived = state
    p = sys.curve.point(s)
    opts, slides = options_at(sys, s)
    pt = (float(p[0]), float(p[1]))
    if not opts:
        rep = classify_point(sys, s)
        if rep.special == "TypeII":
            return ("Done", run.log(EventRecord("ReachTypeII", run.t, pt, s)))
        return ("Done", run.log(EventRecord("DeadEnd", run.t, pt, s, rep.special)))
    if forced is not None:
        choice = forced if isinstance(forced, Choice) else Choice(forced)
        if choice.option not in opts:
            raise DeadEnd(f"option {choice.option} not available at s={s}")
        if len(opts) > 1:
            run.policy_log.append(run.log(EventRecord("PolicyBranch", run.t, pt, s, str(choice))))
    elif len(opts) == 1:
        choice = Choice(opts[0])
    else:
        choice, fits = run.policy.choose(opts)
        detail = str(choice) if fits else f"{choice} (script token did not fit)"
        run.policy_log.append(run.log(EventRecord("PolicyBranch", run.t, pt, s, detail)))
    if choice.option in ("X", "Y"):
        b = _breakpoint(sys, s)
        if b is not None and b in sys.partition.reports and \
                sys.partition.reports[b].region is not Region.SEWING:
            rep = sys.partition.reports[b]
            if rep.region in (Region.TANGENCY_X, Region.TANGENCY_Y, Region.DOUBLE):
                run.log(EventRecord("LeaveSigmaAtTangency", run.t, pt, s, choice.option))
        return ("Flow" + choice.option, p, s)
    direction = slides[choice.option]
    if direction == 0:
        return ("Done", run.log(EventRecord("ReachPseudoEq", run.t, pt, s, "at start of slide")))
    return ("Slide", s, direction, choice)


def _flow(sys, state, run: _Run):
    mode, p, s_from = state
    which = mode[-1]
    arc, ev = integrate_arc(sys.field(which), p, run.remaining(), f=sys.f,
                            side=1 if which == "X" else -1, K=sys.K, tol=sys.tol, mode=mode)
    _shift(arc, run.t)
    ev.time += run.t
    run.t = arc.t1
    if ev.kind == "HitSigma":
        s, _ = sys.curve.locate(ev.point)
        s = _snap(sys, s, ev.detail == "tangential")
        q = sys.curve.point(s)
        ev.s = float(s)
        ev.point = (float(q[0]), float(q[1]))
        arc.samples[-1, 1:] = q
        ev.detail = f"{ev.detail};{which}"
        arc.exit_event = run.log(ev)
        run.arcs.append(arc)
        return ("Sigma", s, which), arc
    arc.exit_event = run.log(ev)
    run.arcs.append(arc)
    return ("Done", ev), arc


def _shift(arc: Arc, t0: float):
    arc.samples[:, 0] += t0
    arc.t0 += t0
    arc.t1 += t0
    arc.pieces = [(lo + t0, hi + t0, _Shifted(fn, t0)) for lo, hi, fn in arc.pieces]


class _Shifted:
    __slots__ = ("fn", "t0")

    def __init__(self, fn, t0):
        self.fn, self.t0 = fn, t0

    def __call__(self, t):
        return self.fn(np.asarray(t) - self.t0)


def _next_breakpoint(sys, s, direction, extra=None):
    bps = list(sys.partition.breakpoints) + ([extra] if extra is not None else [])
    if direction > 0:
        cands = [b for b in bps if b > s + 1e-12]
        return min(cands) if cands else sys.curve.beta
    cands = [b for b in bps if b < s - 1e-12]
    return max(cands) if cands else sys.curve.alpha


def _slide(sys, state, run: _Run):
    _, s0, direction, choice = state
    stop_at = choice.exit_at
    if stop_at is not None and (stop_at - s0) * direction <= 0:
        stop_at = None
    target = _next_breakpoint(sys, s0, direction, stop_at)
    eps = sys.tol.speed
    t_span = run.remaining()
    if choice.dwell is not None:
        t_span = min(t_span, choice.dwell)

    def rhs(t, y):
        return [sliding_speed(sys, y[0])]

    def hit(t, y):
        return y[0] - target
    hit.terminal = True

    def slow(t, y):
        return direction * sliding_speed(sys, y[0]) - eps
    slow.terminal = True
    slow.direction = -1

    entry = EventRecord("SlideStart", run.t, tuple(map(float, sys.curve.point(s0))), float(s0))
    if t_span <= 0:
        ev = run.log(EventRecord("TimeBudget", run.t, entry.point, float(s0)))
        return ("Done", ev), None
    sol = solve_ivp(rhs, (0.0, t_span), [s0], method="DOP853", rtol=1e-12, atol=1e-13,
                    events=[hit, slow], dense_output=True)
    t_end = float(sol.t[-1])
    s_end = float(sol.y[0, -1])
    reason = "time"
    if sol.t_events[0].size:
        t_end, s_end, reason = float(sol.t_events[0][0]), target, "breakpoint"
    elif sol.t_events[1].size:
        t_end, s_end, reason = float(sol.t_events[1][0]), float(sol.y_events[1][0][0]), "slow"
    ts = np.concatenate([sol.t[sol.t < t_end], [t_end]])
    ss = np.concatenate([sol.y[0][sol.t < t_end], [s_end]])
    pts = np.array([sys.curve.point(v) for v in ss])
    samples = np.column_stack([ts + run.t, pts])
    arc = Arc("Slide", run.t, run.t + t_end, samples, entry)
    arc.pieces = [(run.t, run.t + t_end, _SlideDense(sys, sol.sol, run.t, t_end, s_end))]
    run.t += t_end
    q = tuple(map(float, pts[-1]))
    run.arcs.append(arc)
    if reason == "breakpoint" and stop_at is not None and target == stop_at:
        p = sys.curve.point(target)
        ex = choice.exit_field
        arc.exit_event = run.log(EventRecord("DwellExit", run.t, q, float(target), ex))
        if departs(sys, ex, p):
            return ("Flow" + ex, p, target), arc
        return ("Slide", target, direction, Choice("S")), arc
    if reason == "breakpoint":
        if _is_edge(sys, target):
            ev = run.log(EventRecord("ExitK", run.t, q, float(target), "slid off the curve"))
            arc.exit_event = ev
            return ("Done", ev), arc
        arc.exit_event = run.log(EventRecord("SlideBreakpoint", run.t, q, float(target)))
        return ("Sigma", target, "S"), arc
    if reason == "slow":
        ev = run.log(EventRecord("ReachPseudoEq", run.t, q, s_end, "asymptotic"))
        arc.exit_event = ev
        return ("Done", ev), arc
    if choice.dwell is not None and t_end >= choice.dwell - 1e-15 and run.remaining() > 0:
        p = sys.curve.point(s_end)
        ex = choice.exit_field
        arc.exit_event = run.log(EventRecord("DwellExit", run.t, q, s_end, ex))
        if departs(sys, ex, p):
            return ("Flow" + ex, p, s_end), arc
        return ("Slide", s_end, direction, Choice("S")), arc
    ev = run.log(EventRecord("TimeBudget", run.t, q, s_end))
    arc.exit_event = ev
    return ("Done", ev), arc


class _SlideDense:
    __slots__ = ("sys", "sol", "t0", "t_end", "s_end")

    def __init__(self, sys, sol, t0, t_end, s_end):
        self.sys, self.sol, self.t0, self.t_end, self.s_end = sys, sol, t0, t_end, s_end

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, float)) - self.t0
        s = self.sol(np.clip(t, 0.0, self.t_end))[0]
        return np.array([self.sys.curve.point(v) for v in s]).T


def simulate(sys: PiecewiseSystem, p0, t_budget: float = 200.0, policy: Policy | None = None,
             *, max_arcs: int = MAX_ARCS, state: tuple | None = None) -> Trajectory:
    policy = policy or Policy()
    run = _Run(sys, policy.start(), float(t_budget))
    st = state or initial_state(sys, p0)
    if st[0] == "Sigma":
        p = sys.curve.point(st[1])
        run.log(EventRecord("Start", 0.0, (float(p[0]), float(p[1])), float(st[1])))
    steps = 0
    while st[0] != "Done":
        st, arc = advance(sys, st, run)
        steps += 1
        if len(run.arcs) >= max_arcs or steps > 4 * max_arcs:
            ev = run.log(EventRecord("ArcBudget", run.t))
            st = ("Done", ev)
    return Trajectory(run.arcs, run.events, run.policy_log, st[1], policy.describe())


# --- legality ----------------------------------------------------------------

def check_legality(sys: PiecewiseSystem, traj: Trajectory) -> list[str]:
    """Transitions between consecutive arcs that break the mode rules."""
    bad = []
    part = sys.partition
    tangencies = set(part.tangencies.get("X", []) + part.tangencies.get("Y", []))
    for a, b in zip(traj.arcs, traj.arcs[1:]):
        ev = a.exit_event
        s = ev.s if ev is not None else None
        at_tan = s is not None and any(abs(s - t) <= SNAP_TAN for t in tangencies)
        region = part.region_at(s) if s is not None else None
        pair = (a.mode, b.mode)
        if pair in (("FlowX", "Slide"), ("FlowY", "Slide")):
            ok = region is Region.SLIDING or at_tan
        elif pair in (("Slide", "FlowX"), ("Slide", "FlowY")):
            p = sys.curve.point(s)
            ok = (region is Region.ESCAPING) or (at_tan and departs(sys, b.mode[-1], p))
        elif pair in (("FlowX", "FlowY"), ("FlowY", "FlowX")):
            ok = region is Region.SEWING or at_tan
        elif pair == ("Slide", "Slide"):
            ok = s is not None and s in part.breakpoints or (ev is not None and ev.kind == "DwellExit")
        else:  # same smooth field twice: only through a tangential touch
            ok = at_tan
        if not ok:
            bad.append(f"{pair[0]}->{pair[1]} at s={s} (region {region})")
    return bad


# --- branch enumeration ------------------------------------------------------

@dataclass
class BranchNode:
    state: tuple
    choice: str | None
    arcs: list[Arc]
    events: list[EventRecord]
    children: list["BranchNode"] = field(default_factory=list)
    duplicate: bool = False


def branch_tree(sys: PiecewiseSystem, p0, depth: int, *, t_budget: float = 50.0,
                max_nodes: int = 5000, state: tuple | None = None) -> BranchNode:
    """Breadth-first enumeration of the legal choices at each branch point.

    A node is one branch decision; its arcs run until the next state with two
    or more options (or termination).  Children re-meeting the curve within
    the dedup tolerance of an already expanded state are marked duplicate.
    """
    if depth > MAX_DEPTH:
        raise BudgetExceeded(f"depth {depth} exceeds the maximum {MAX_DEPTH}")
    root_state = state or initial_state(sys, p0)
    root = BranchNode(root_state, None, [], [])
    seen: list[float] = []
    frontier = [(root, 0)]
    count = 0
    while frontier:
        node, d = frontier.pop(0)
        if d >= depth or node.state[0] == "Done":
            continue
        st = node.state
        if st[0] != "Sigma":
            run = _Run(sys, None, t_budget)
            st = _run_to_branch(sys, st, run)
            node.arcs.extend(run.arcs)
            node.events.extend(run.events)
            node.state = st
            if st[0] == "Done":
                continue
        opts, _ = options_at(sys, st[1])
        for o in opts:
            count += 1
            if count > max_nodes:
                raise BudgetExceeded("branch tree node budget exhausted")
            run = _Run(sys, None, t_budget)
            nxt, _ = advance(sys, st, run, forced=o)
            nxt = _run_to_branch(sys, nxt, run)
            child = BranchNode(nxt, o, run.arcs, run.events)
            if nxt[0] == "Sigma":
                if any(abs(nxt[1] - v) <= sys.tol.dedup for v in seen):
                    child.duplicate = True
                else:
                    seen.append(nxt[1])
            node.children.append(child)
            if not child.duplicate:
                frontier.append((child, d + 1))
    return root


def _run_to_branch(sys, st, run: _Run):
    """Advance through forced transitions until a real branch point or the end."""
    for _ in range(MAX_ARCS):
        if st[0] == "Done":
            return st
        if st[0] == "Sigma":
            opts, _ = options_at(sys, st[1])
            if len(opts) != 1:
                if not opts:
                    st, _ = advance(sys, st, run)
                return st
        st, _ = advance(sys, st, run, forced=None if st[0] != "Sigma" else options_at(sys, st[1])[0][0])
    return st


def leaves(node: BranchNode) -> list[BranchNode]:
    if not node.children:
        return [node]
    out = []
    for c in node.children:
        out.extend(leaves(c))
    return out
