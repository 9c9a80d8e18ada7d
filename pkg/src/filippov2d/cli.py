"""Command line interface: ``filippov2d <command> ...``.

Exit codes: 0 success / verdict as expected, 1 error, 2 verdict mismatch,
3 hypothesis violation with ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys as _sys
import warnings
from pathlib import Path

from . import scenarios
from .errors import FilippovError, HypothesisViolation
from .hybrid import simulate
from .io import HypothesisWarning, RunConfig, load_system, report_json, tolerances_from
from .limitset import classify_omega
from .policy import Policy
from .svg import emit_svg
from .tolerances import Tolerances

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH, EXIT_STRICT = 0, 1, 2, 3


def _tol_overrides(items: list[str]) -> dict:
    out = {}
    for it in items or []:
        k, _, v = it.partition("=")
        if not v:
            raise FilippovError(f"--tol expects name=value, got {it!r}")
        out[k] = int(v) if k == "max_order" else float(v)
    return out


def _load(path: str, args) -> object:
    base = Tolerances.from_env()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        sys = load_system(path, check=False)
    tol = tolerances_from(_tol_overrides(args.tol), tolerances_from(
        (sys.meta or {}).get("tolerance_overrides"), base))
    return sys.with_tol(tol)


def _policy(args) -> Policy:
    if args.policy == "Scripted":
        return Policy.scripted(args.script or "", repeat=args.repeat)
    if args.policy == "SeededRandom":
        return Policy.seeded(args.seed)
    return Policy(args.policy)


def _write(path: str | None, text: str):
    if path:
        Path(path).write_text(text, encoding="utf-8")


def trajectory_csv(traj) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "mode", "arc_index", "event_flag"])
    for t, x, y, mode, k, flag in traj.rows():
        w.writerow([f"{t:.17g}", f"{x:.17g}", f"{y:.17g}", mode, k, flag])
    return buf.getvalue()


def _hyp_status(sys, strict: bool) -> tuple[dict, int]:
    rep = sys.hypotheses()
    for m in rep.messages:
        print(f"warning: {m}", file=_sys.stderr)
    return {"ok": rep.ok, "messages": rep.messages}, (EXIT_STRICT if strict and not rep.ok else EXIT_OK)


# --- commands ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    sys = _load(args.system, args)
    hyp, status = _hyp_status(sys, args.strict)
    part = sys.partition
    print(f"system {sys.name or args.system}: {len(part.intervals)} intervals, "
          f"{len(part.pseudo_equilibria)} pseudo-equilibria")
    for iv in part.intervals:
        print(f"  [{iv.lo:.6g}, {iv.hi:.6g}] {iv.region.value}")
    for b in part.breakpoints:
        r = part.reports[b]
        if r.region.value not in ("Sewing", "Sliding", "Escaping"):
            extra = f" {r.double_kind}" if r.double_kind != "None" else ""
            print(f"  s={b:.9g} ({r.point[0]:.6g}, {r.point[1]:.6g}) {r.region.value}{extra}")
    _write(args.json, report_json({"hypotheses": hyp, "partition": part.to_dict()}))
    if args.svg:
        emit_svg(args.svg, sys, title=sys.name)
    return status


def _run_traj(args):
    if args.config:
        cfg = RunConfig.load(args.config)
        args.system = args.system or cfg.system
        args.p0 = args.p0 or cfg.p0
        args.t_budget = cfg.t_budget
        args.policy, args.script, args.seed = cfg.policy, cfg.script, cfg.seed
        args.tol = (args.tol or []) + [f"{k}={v}" for k, v in cfg.tolerances.items()]
        args.csv = args.csv or cfg.out_csv
        args.svg = args.svg or cfg.out_svg
        args.json = args.json or cfg.out_json
        args.strict = args.strict or cfg.strict
    if not args.system or args.p0 is None:
        raise FilippovError("a system file and --p0 are required")
    sys = _load(args.system, args)
    traj = simulate(sys, tuple(args.p0), args.t_budget, _policy(args))
    return sys, traj


def cmd_simulate(args) -> int:
    sys, traj = _run_traj(args)
    _, status = _hyp_status(sys, args.strict)
    print(f"{len(traj.arcs)} arcs, terminal {traj.terminal.kind} at t={traj.terminal.time:.6g}")
    print("modes: " + " ".join(traj.modes[:40]) + (" ..." if len(traj.arcs) > 40 else ""))
    _write(args.csv, trajectory_csv(traj))
    _write(args.json, report_json({"policy": traj.policy, "terminal": traj.terminal.to_dict(),
                                   "events": [e.to_dict() for e in traj.events]}))
    if args.svg:
        emit_svg(args.svg, sys, traj, title=sys.name)
    return status


def cmd_classify(args) -> int:
    sys, traj = _run_traj(args)
    _, status = _hyp_status(sys, args.strict)
    rep = classify_omega(sys, traj)
    print(f"verdict: {rep.tag}")
    for k, v in rep.evidence.items():
        if k != "lambda":
            print(f"  {k}: {v}")
    _write(args.json, report_json(rep.to_dict()))
    _write(args.csv, trajectory_csv(traj))
    if args.svg:
        emit_svg(args.svg, sys, traj, rep.lam, title=rep.tag)
    if status:
        return status
    if args.expect and args.expect not in (rep.tag, rep.verdict):
        print(f"expected {args.expect}", file=_sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_chaos(args) -> int:
    from .chaos import chaos_conditions, construct_lambda, linear_chaos_conditions, theorem2_probes
    from .system import as_linear
    sys = _load(args.system, args)
    _, status = _hyp_status(sys, args.strict)
    out = {"conditions": chaos_conditions(sys)}
    lin = as_linear(sys)
    if lin is not None:
        try:
            out["linear_conditions"] = linear_chaos_conditions(lin)
        except FilippovError as e:
            out["linear_conditions"] = {"error": str(e)}
    c = out["conditions"]
    for k in ("double_tangency", "parabolic_or_hyperbolic", "no_crossing_in_K", "two_sided_visits_witness"):
        print(f"{k}: {c[k]}")
    if "linear_conditions" in out and "i" in out["linear_conditions"]:
        lc = out["linear_conditions"]
        print(f"linear conditions: (i) {lc['i']} (ii) {lc['ii']} (iii) {lc['iii']}")
    lam = None
    passed = c["parabolic_or_hyperbolic"]
    if passed:
        s_t = args.tangency_s
        if s_t is None:
            s_t = next(r.s for r in sys.partition.reports.values()
                       if r.double_kind in ("Parabolic", "Hyperbolic"))
        try:
            lam = construct_lambda(sys, s_t)
        except FilippovError as e:
            print(f"Lambda: not constructed ({e})")
            out["lambda"] = {"error": str(e)}
            passed = False
        else:
            out["lambda"] = lam.summary()
            print(f"Lambda: area {lam.area:.6g}, closure gap {lam.closure_gap:.3g}")
            if args.samples > 0:
                pr = theorem2_probes(sys, lam, args.samples, args.seed)
                out["probes"] = {k: pr[k] for k in ("a", "b", "c", "d", "passed", "coverage")}
                print("probes: " + " ".join(f"({k}) {pr[k]}" for k in "abcd")
                      + f", coverage {pr['coverage']['coverage']:.4f}")
                passed = passed and pr["passed"]
    _write(args.json, report_json(out))
    if args.svg:
        emit_svg(args.svg, sys, None, lam, title="chaos-check")
    if status:
        return status
    return EXIT_OK if passed else EXIT_MISMATCH


def cmd_scenario(args) -> int:
    if args.list or not args.name:
        for n in scenarios.NAMES:
            print(n)
        return EXIT_OK
    ov = {"probes": not args.no_probes, "strict": args.strict}
    if args.seed is not None:
        ov["seed"] = args.seed
    if args.tol:
        ov["tolerances"] = tolerances_from(_tol_overrides(args.tol), Tolerances.from_env())
    res = scenarios.run_scenario(args.name, ov)
    for r in res["runs"]:
        exp = r["expected"]
        want = "" if not exp else exp["verdict"] + (f"({exp['kind']})" if exp.get("kind") else "")
        mark = "ok" if r["match"] is not False else "MISMATCH"
        print(f"{r['label']}: {r['verdict']} (expected {want}) {mark}")
    for k, v in res["probes"].items():
        print(f"probe {k}: {'pass' if v.get('passed') else 'FAIL'}")
    _write(args.json, report_json(res))
    if args.svg or args.csv:
        spec = scenarios.load_scenario(args.name)
        traj = simulate(spec.system, spec.suggested_p0, spec.runs[0].get("t_budget", 200.0),
                        spec.suggested_policy)
        _write(args.csv, trajectory_csv(traj))
        if args.svg:
            emit_svg(args.svg, spec.system, traj, title=args.name)
    return res["exit_status"]


# --- parser ------------------------------------------------------------------

def _common(p, system: str | None = "required"):
    if system == "required":
        p.add_argument("system", help="system JSON file")
    elif system == "optional":
        p.add_argument("system", nargs="?", help="system JSON file (or give --config)")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")
    p.add_argument("--strict", action="store_true", help="exit 3 on hypothesis violations")
    p.add_argument("--json", metavar="PATH", help="write a JSON report")
    p.add_argument("--svg", metavar="PATH", help="write an SVG portrait")


def _traj_args(p):
    p.add_argument("--p0", nargs=2, type=float, metavar=("X", "Y"))
    p.add_argument("--t-budget", type=float, default=200.0)
    p.add_argument("--policy", default="StaySliding",
                   choices=["AlwaysX", "AlwaysY", "StaySliding", "Scripted", "SeededRandom"])
    p.add_argument("--script", default="", help="tokens for the Scripted policy, e.g. 'X,S,Y+0.5'")
    p.add_argument("--repeat", action="store_true", help="cycle the script")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="PATH", help="write the trajectory as CSV")
    p.add_argument("--config", metavar="PATH", help="run configuration JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="filippov2d", description="Planar Filippov systems toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="partition the switching curve")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulate one maximal trajectory")
    _common(p, "optional")
    _traj_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify-omega", help="simulate and classify the omega-limit")
    _common(p, "optional")
    _traj_args(p)
    p.add_argument("--expect", help="expected verdict tag, e.g. 'PseudoCycle(Crossing)'")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("chaos-check", help="chaos conditions, Lambda and probes")
    _common(p)
    p.add_argument("--tangency-s", type=float)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_chaos)

    p = sub.add_parser("scenario", help="run a shipped scenario")
    p.add_argument("name", nargs="?", help="one of: " + ", ".join(scenarios.NAMES))
    p.add_argument("--list", action="store_true")
    p.add_argument("--no-probes", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", metavar="PATH")
    _common(p, None)
    p.set_defaults(func=cmd_scenario)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HypothesisViolation as e:
        print(f"error: {type(e).__name__}: {e}", file=_sys.stderr)
        return EXIT_STRICT if getattr(args, "strict", False) else EXIT_ERROR
    except (FilippovError, OSError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
