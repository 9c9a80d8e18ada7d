"""Registry of the shipped example systems.

Each scenario is a system file under ``scenarios/`` whose ``scenario`` block
lists suggested runs with the expected verdict tag, plus optional probes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from scipy.optimize import brentq

from .curves import SwitchingCurve
from .errors import FilippovError, UnknownScenario
from .hybrid import simulate
from .integrate import integrate_arc
from .io import HypothesisWarning, doc_from_system, dumps, loads
from .limitset import OmegaReport, classify_omega
from .policy import Policy
from .poly import Poly2, PolyField
from .system import PiecewiseSystem, from_relay
from .tolerances import Tolerances

NAMES = ("three-zone", "linear-center-center", "relay-template", "fold-fold-connection")


@dataclass
class ScenarioSpec:
    name: str
    system: PiecewiseSystem
    suggested_K: tuple
    suggested_p0: tuple
    suggested_policy: Policy
    runs: list = field(default_factory=list)
    probes: dict = field(default_factory=dict)

    @property
    def expected(self) -> dict | None:
        return self.runs[0]["expected"] if self.runs else None

    @classmethod
    def from_system(cls, sys: PiecewiseSystem) -> "ScenarioSpec":
        block = (sys.meta or {}).get("scenario") or {}
        runs = block.get("runs", [])
        first = runs[0] if runs else {}
        return cls(sys.name, sys, sys.K, tuple(first.get("p0", (0.0, 0.0))),
                   Policy.from_spec(first.get("policy", "StaySliding")), runs,
                   block.get("probes", {}))


def scenario_text(name: str) -> str:
    if name not in NAMES:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(NAMES)}")
    return resources.files(__package__).joinpath("scenarios", f"{name}.json").read_text("utf-8")


def load_scenario(name: str, tol: Tolerances | None = None) -> ScenarioSpec:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        sys = loads(scenario_text(name), source=f"{name}.json", tol=tol, check=False)
    return ScenarioSpec.from_system(sys)


# --- running ----------------------------------------------------------------

def verdict_matches(report: OmegaReport, expected: dict | None) -> bool | None:
    if not expected:
        return None
    if report.verdict != expected.get("verdict"):
        return False
    return expected.get("kind") is None or report.kind == expected["kind"]


def run_scenario(name: str, overrides: dict | None = None) -> dict:
    """Analyze, simulate and classify every suggested run; compare with expectations.

    ``overrides`` may hold p0, t_budget, policy (spec), tolerances (a
    Tolerances), probes (bool) and strict (bool).  The returned dict has an
    ``exit_status``: 0 all matched, 2 mismatch, 3 hypothesis warning under strict.
    """
    ov = dict(overrides or {})
    spec = load_scenario(name, tol=ov.get("tolerances"))
    sys = spec.system
    hyp = sys.hypotheses()
    out = {"scenario": name, "hypotheses": {"ok": hyp.ok, "messages": hyp.messages},
           "partition": sys.partition.to_dict(), "runs": [], "probes": {}}
    all_ok = True
    for run in spec.runs:
        p0 = tuple(ov.get("p0", run["p0"]))
        policy = Policy.from_spec(ov.get("policy", run.get("policy", "StaySliding")))
        t_budget = float(ov.get("t_budget", run.get("t_budget", 200.0)))
        traj = simulate(sys, p0, t_budget, policy)
        rep = classify_omega(sys, traj, build_lambda=ov.get("probes", True))
        ok = verdict_matches(rep, run.get("expected"))
        all_ok = all_ok and ok is not False
        out["runs"].append({"label": run.get("label", ""), "p0": list(p0), "policy": policy.describe(),
                            "t_budget": t_budget, "verdict": rep.tag, "expected": run.get("expected"),
                            "match": ok, "report": rep.to_dict(), "terminal": traj.terminal.to_dict(),
                            "log": traj.log_keys()})
    if ov.get("probes", True):
        for key, probe in spec.probes.items():
            res = run_probe(sys, key, probe, seed=int(ov.get("seed", probe.get("seed", 0))))
            out["probes"][key] = res
            all_ok = all_ok and res.get("passed", True)
    status = 0 if all_ok else 2
    if ov.get("strict") and not hyp.ok:
        status = 3
    out["passed"] = all_ok
    out["exit_status"] = status
    return out


def run_probe(sys: PiecewiseSystem, key: str, probe: dict, seed: int = 0) -> dict:
    from .chaos import chaos_conditions, minimality_probe, theorem2_probes
    region = _region(sys, probe.get("region", {}))
    n = int(probe.get("n_samples", 20))
    try:
        if key == "minimality":
            res = minimality_probe(sys, region, probe.get("hub"), n, seed)
        elif key == "theorem2":
            res = theorem2_probes(sys, region, n, seed)
            res = {k: res[k] for k in ("a", "b", "c", "d", "passed", "coverage")}
        elif key == "chaos_conditions":
            res = chaos_conditions(sys)
            res["passed"] = all(res[k] for k in ("double_tangency", "parabolic_or_hyperbolic",
                                                   "no_crossing_in_K", "two_sided_visits_witness"))
        else:
            raise ValueError(f"unknown probe {key!r}")
    except FilippovError as e:
        return {"passed": False, "error": f"{type(e).__name__}: {e}"}
    res["region"] = region.summary()
    return res


def _region(sys, spec: dict):
    from .chaos import circuit_region, construct_lambda
    if spec.get("kind") == "circuit":
        return circuit_region(sys, tuple(spec["hub"]), spec.get("outer_script", "X"),
                              spec.get("inner_field", "Y"))
    s_t = spec.get("tangency_s")
    if s_t is None:
        from .sigma import double_tangencies
        doubles = double_tangencies(sys)
        s_t = doubles[0].s if doubles else sys.curve.alpha
    return construct_lambda(sys, float(s_t))


# --- building the shipped files ---------------------------------------------------

def _field(u: dict, v: dict) -> PolyField:
    return PolyField(Poly2(u), Poly2(v))


def build_three_zone() -> PiecewiseSystem:
    K = (-3.0, 3.0, -3.0, 3.0)
    f = Poly2({(2, 0): 1, (0, 0): -1})
    sigma = {"kind": "union", "pieces": [{"kind": "vertical-line", "x": -1.0},
                                         {"kind": "vertical-line", "x": 1.0}]}
    X = _field({(0, 1): -1, (0, 0): -1}, {(1, 0): 1})
    Y = _field({(0, 1): -2}, {(1, 0): 1})
    block = {
        "runs": [
            {"label": "scripted circuit through the hub", "p0": [-1, 0],
             "policy": {"tag": "Scripted", "script": "X", "repeat": True}, "t_budget": 100,
             "expected": {"verdict": "MildPseudoCycle", "kind": "I"}},
        ],
        "probes": {
            "minimality": {"hub": [-1, 0], "n_samples": 20, "seed": 0,
                           "region": {"kind": "circuit", "hub": [-1, 0], "outer_script": "X",
                                      "inner_field": "Y"}},
        },
    }
    return PiecewiseSystem(SwitchingCurve.from_spec(f, sigma, K), X, Y, K, name="three-zone",
                           meta={"scenario": block})


def build_linear_center_center() -> PiecewiseSystem:
    K = (-5.0, 2.0, -3.0, 3.0)
    f = Poly2({(1, 0): -1})
    X = _field({(1, 0): -0.5, (0, 1): -1, (0, 0): -1}, {(1, 0): 1, (0, 1): 0.5, (0, 0): 2})
    Y = _field({(1, 0): 1, (0, 1): 1, (0, 0): 1}, {(1, 0): -2, (0, 1): -1, (0, 0): -2})
    block = {
        "runs": [
            {"label": "stay sliding", "p0": [-2, -2.2], "policy": {"tag": "StaySliding"},
             "t_budget": 200, "expected": {"verdict": "PseudoEquilibrium"}},
            {"label": "seeded escapes", "p0": [0, -2], "policy": {"tag": "SeededRandom", "seed": 1},
             "t_budget": 200, "expected": {"verdict": "ChaoticTypeIII"}},
        ],
        "probes": {
            "chaos_conditions": {},
            "theorem2": {"n_samples": 20, "seed": 0, "region": {"tangency_s": -1}},
            "minimality": {"hub": [0, -1], "n_samples": 20, "seed": 0,
                           "region": {"tangency_s": -1}},
        },
    }
    return PiecewiseSystem(SwitchingCurve.from_spec(f, {"kind": "vertical-line", "x": 0.0}, K),
                           X, Y, K, name="linear-center-center", meta={"scenario": block})


def build_relay_template() -> PiecewiseSystem:
    A, B, C = ((-0.1, 1.0), (-1.0, -0.1)), (1.0, 0.3), (0.0, 1.0)
    sys = from_relay(A, B, C, (-5.0, 5.0, -5.0, 5.0), name="relay-template")
    block = {
        "relay": {"A": [list(r) for r in A], "B": list(B), "C": list(C)},
        "runs": [
            {"label": "self-oscillation from outside", "p0": [3, 1],
             "policy": {"tag": "StaySliding"}, "t_budget": 200,
             "expected": {"verdict": "PseudoCycle", "kind": "Crossing"}},
            {"label": "self-oscillation from inside", "p0": [0, 0.01],
             "policy": {"tag": "StaySliding"}, "t_budget": 200,
             "expected": {"verdict": "PseudoCycle", "kind": "Crossing"}},
        ],
    }
    return PiecewiseSystem(sys.curve, sys.X, sys.Y, sys.K, name=sys.name, meta={"scenario": block})


def _fold_fold(mu: float, K) -> PiecewiseSystem:
    # X(p) = A (p - c) rotating about c = (1, mu - 1); Y(p) = -X(-p)
    c = (1.0, mu - 1.0)
    b = (-(mu * c[0] - c[1]), -(c[0] + mu * c[1]))
    X = _field({(1, 0): mu, (0, 1): -1.0, (0, 0): b[0]}, {(1, 0): 1.0, (0, 1): mu, (0, 0): b[1]})
    Y = _field({(1, 0): mu, (0, 1): -1.0, (0, 0): -b[0]}, {(1, 0): 1.0, (0, 1): mu, (0, 0): -b[1]})
    curve = SwitchingCurve.from_spec(Poly2({(1, 0): 1}), {"kind": "vertical-line", "x": 0.0}, K)
    return PiecewiseSystem(curve, X, Y, K, name="fold-fold-connection")


def shoot_fold_connection(K=(-4.0, 4.0, -4.0, 4.0)) -> float:
    """mu for which the X-orbit leaving the fold (0,-1) lands on the fold (0,1)."""
    def miss(mu):
        s = _fold_fold(mu, K)
        _, ev = integrate_arc(s.X, (0.0, -1.0), 50.0, f=s.f, side=1, K=s.K)
        return ev.point[1] - 1.0
    return float(brentq(miss, 0.1, 0.2, xtol=1e-15))


def build_fold_fold_connection() -> PiecewiseSystem:
    K = (-4.0, 4.0, -4.0, 4.0)
    mu = shoot_fold_connection(K)
    s = _fold_fold(mu, K)
    block = {
        "parameters": {"mu": mu},
        "runs": [
            {"label": "connection orbit", "p0": [0, -1], "policy": {"tag": "StaySliding"},
             "t_budget": 80, "expected": {"verdict": "PseudoCycle", "kind": "Tangent"}},
        ],
    }
    return PiecewiseSystem(s.curve, s.X, s.Y, K, name=s.name, meta={"scenario": block})


BUILDERS = {
    "three-zone": build_three_zone,
    "linear-center-center": build_linear_center_center,
    "relay-template": build_relay_template,
    "fold-fold-connection": build_fold_fold_connection,
}


def write_shipped(directory=None) -> list[Path]:
    """Regenerate the shipped scenario files."""
    d = Path(directory) if directory else Path(__file__).parent / "scenarios"
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for name, build in BUILDERS.items():
        p = d / f"{name}.json"
        p.write_text(dumps(doc_from_system(build())), encoding="utf-8")
        out.append(p)
    return out
