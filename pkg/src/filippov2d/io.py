"""JSON system files and run configurations.

A system file looks like::

    {
      "format": "filippov2d/1",
      "name": "three-zone",
      "f": [[2, 0, 1], [0, 0, -1]],
      "X": {"u": [[0, 1, -1], [0, 0, -1]], "v": [[1, 0, 1]]},
      "Y": {"u": [[0, 1, -2]], "v": [[1, 0, 1]]},
      "sigma": {"kind": "union", "pieces": [...]},
      "K": [-3, 3, -3, 3],
      "tolerances": {"tan": 1e-10},
      "scenario": {...}
    }

Polynomials are lists of ``[i, j, c]`` triples meaning ``c x^i y^j``.
Files written by :func:`dumps` are canonical: loading and saving one
reproduces it byte for byte.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .curves import KINDS, SwitchingCurve
from .errors import FilippovError, ParseError, SchemaError
from .poly import Poly2, PolyField
from .system import PiecewiseSystem
from .tolerances import DEFAULT, TOL_MAX, TOL_MIN, Tolerances

FORMAT = "filippov2d/1"
TOP_KEYS = ("format", "name", "f", "X", "Y", "sigma", "K", "tolerances", "scenario")
REQUIRED = ("f", "X", "Y", "sigma", "K")
SIGMA_KEYS = {
    "vertical-line": {"x"},
    "horizontal-line": {"y"},
    "line": {"point", "direction"},
    "circle": {"center", "radius"},
    "explicit-parametric": {"x", "y", "range"},
    "union": {"pieces"},
}


class HypothesisWarning(UserWarning):
    pass


# --- parsing -----------------------------------------------------------------

def parse_json(text: str, source: str = "<string>") -> dict:
    if not text.strip():
        raise ParseError(f"{source}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be an object")
    return doc


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {v!r}")
    return v


def _poly(v, where: str, exact: bool) -> Poly2:
    if not isinstance(v, list):
        raise SchemaError(f"{where}: expected a list of [i, j, c] triples")
    triples = []
    for k, t in enumerate(v):
        w = f"{where}[{k}]"
        if not isinstance(t, list) or len(t) != 3:
            raise SchemaError(f"{w}: expected [i, j, c]")
        i, j, c = t
        for e, name in ((i, "i"), (j, "j")):
            if isinstance(e, bool) or not isinstance(e, int) or e < 0:
                raise SchemaError(f"{w}.{name}: exponent must be a non-negative integer")
        c = _num(c, f"{w}.c")
        if exact:
            c = Fraction(repr(c)) if isinstance(c, float) else c
        else:
            c = float(c)
        triples.append((i, j, c))
    return Poly2.from_triples(triples)


def _field(v, where: str, exact: bool) -> PolyField:
    if not isinstance(v, dict) or set(v) != {"u", "v"}:
        raise SchemaError(f"{where}: expected an object with keys 'u' and 'v'")
    return PolyField(_poly(v["u"], f"{where}.u", exact), _poly(v["v"], f"{where}.v", exact))


def _check_sigma(spec, where: str = "sigma"):
    if not isinstance(spec, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = spec.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"{where}.kind: must be one of {KINDS}, got {kind!r}")
    allowed = SIGMA_KEYS[kind] | {"kind", "range"}
    extra = set(spec) - allowed
    if extra:
        raise SchemaError(f"{where}: unknown keys {sorted(extra)}")
    missing = SIGMA_KEYS[kind] - set(spec) - ({"range"} if kind != "explicit-parametric" else set())
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    if kind == "union":
        if not isinstance(spec["pieces"], list) or not spec["pieces"]:
            raise SchemaError(f"{where}.pieces: expected a non-empty list")
        for k, p in enumerate(spec["pieces"]):
            if isinstance(p, dict) and p.get("kind") == "union":
                raise SchemaError(f"{where}.pieces[{k}]: unions cannot nest")
            _check_sigma(p, f"{where}.pieces[{k}]")


def _box(v) -> tuple[float, float, float, float]:
    if not isinstance(v, list) or len(v) != 4:
        raise SchemaError("K: expected [xmin, xmax, ymin, ymax]")
    K = tuple(float(_num(c, f"K[{i}]")) for i, c in enumerate(v))
    if not (K[0] < K[1] and K[2] < K[3]):
        raise SchemaError("K: need xmin < xmax and ymin < ymax")
    return K


def tolerances_from(over: dict | None, base: Tolerances = DEFAULT, where: str = "tolerances") -> Tolerances:
    if not over:
        return base
    if not isinstance(over, dict):
        raise SchemaError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(Tolerances)}
    kw = {}
    for k, v in over.items():
        if k not in names:
            raise SchemaError(f"{where}.{k}: unknown tolerance (known: {sorted(names)})")
        if k == "max_order":
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 32:
                raise SchemaError(f"{where}.max_order: expected an integer in [1, 32]")
        else:
            v = _num(v, f"{where}.{k}")
            if not TOL_MIN <= v <= TOL_MAX:
                raise SchemaError(f"{where}.{k}={v} outside [{TOL_MIN:g}, {TOL_MAX:g}]")
        kw[k] = v
    return base.replace(**kw)


def system_from_doc(doc: dict, *, exact: bool = False, source: str = "<doc>",
                    tol: Tolerances | None = None) -> PiecewiseSystem:
    unknown = set(doc) - set(TOP_KEYS)
    if unknown:
        raise SchemaError(f"{source}: unknown keys {sorted(unknown)}")
    for k in REQUIRED:
        if k not in doc:
            raise SchemaError(f"{source}: missing key {k!r}")
    if doc.get("format", FORMAT) != FORMAT:
        raise SchemaError(f"{source}: format must be {FORMAT!r}")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("name: expected a string")
    f = _poly(doc["f"], "f", exact)
    X = _field(doc["X"], "X", exact)
    Y = _field(doc["Y"], "Y", exact)
    _check_sigma(doc["sigma"])
    K = _box(doc["K"])
    tol = tolerances_from(doc.get("tolerances"), tol or DEFAULT)
    try:
        curve = SwitchingCurve.from_spec(f, doc["sigma"], K)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"sigma: {e}") from None
    scen = doc.get("scenario")
    if scen is not None and not isinstance(scen, dict):
        raise SchemaError("scenario: expected an object")
    meta = {"scenario": scen, "tolerance_overrides": doc.get("tolerances")}
    return PiecewiseSystem(curve, X, Y, K, tol, name, meta)


def loads(text: str, *, exact: bool = False, source: str = "<string>", check: bool = True,
          tol: Tolerances | None = None) -> PiecewiseSystem:
    sys = system_from_doc(parse_json(text, source), exact=exact, source=source, tol=tol)
    if check:
        try:
            rep = sys.hypotheses()
        except FilippovError as e:
            warnings.warn(f"{source}: hypothesis check failed: {e}", HypothesisWarning, stacklevel=2)
        else:
            for m in rep.messages:
                warnings.warn(f"{source}: {m}", HypothesisWarning, stacklevel=2)
    return sys


def load_system(path, **kw) -> PiecewiseSystem:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"{p}: {e.strerror}") from None
    return loads(text, source=str(p), **kw)


# --- writing ------------------------------------------------------------------

def _canon(v):
    if isinstance(v, dict):
        return {k: _canon(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_canon(x) for x in v]
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, float) and v.is_integer() and abs(v) < 2 ** 53:
        return int(v)
    return v


def doc_from_system(sys: PiecewiseSystem) -> dict:
    doc = {
        "format": FORMAT,
        "name": sys.name,
        "f": sys.f.triples(),
        "X": {"u": sys.X.u.triples(), "v": sys.X.v.triples()},
        "Y": {"u": sys.Y.u.triples(), "v": sys.Y.v.triples()},
        "sigma": sys.curve.spec,
        "K": list(sys.K),
    }
    over = (sys.meta or {}).get("tolerance_overrides")
    if over is None:
        over = {f.name: getattr(sys.tol, f.name) for f in dataclasses.fields(Tolerances)
                if getattr(sys.tol, f.name) != getattr(DEFAULT, f.name)}
    if over:
        doc["tolerances"] = over
    scen = (sys.meta or {}).get("scenario")
    if scen:
        doc["scenario"] = scen
    return doc


def dumps(doc: dict) -> str:
    return _compact_triples(json.dumps(_canon(doc), indent=2, ensure_ascii=False)) + "\n"


def _compact_triples(text: str) -> str:
    """Put short numeric lists on one line so polynomials stay readable."""
    pat = re.compile(r"\[\s*(-?[\w.+-]+(?:,\s*-?[\w.+-]+)*)\s*\]")
    return pat.sub(lambda m: "[" + ", ".join(s.strip() for s in m.group(1).split(",")) + "]", text)


def save_system(sys: PiecewiseSystem, path) -> None:
    Path(path).write_text(dumps(doc_from_system(sys)), encoding="utf-8")


# --- run configuration ----------------------------------------------------------

@dataclass
class RunConfig:
    system: str | None = None
    scenario: str | None = None
    command: str = "simulate"
    p0: tuple[float, float] | None = None
    t_budget: float = 200.0
    policy: str = "StaySliding"
    script: str = ""
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out_json: str | None = None
    out_csv: str | None = None
    out_svg: str | None = None
    strict: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise SchemaError("run configuration must be an object")
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise SchemaError(f"run configuration: unknown keys {sorted(extra)}")
        cfg = cls(**d)
        if cfg.p0 is not None:
            if not isinstance(cfg.p0, (list, tuple)) or len(cfg.p0) != 2:
                raise SchemaError("p0: expected [x, y]")
            cfg.p0 = (float(_num(cfg.p0[0], "p0[0]")), float(_num(cfg.p0[1], "p0[1]")))
        _num(cfg.t_budget, "t_budget")
        if cfg.t_budget <= 0:
            raise SchemaError("t_budget must be positive")
        if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int):
            raise SchemaError("seed: expected an integer")
        tolerances_from(cfg.tolerances)
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        return cls.from_dict(parse_json(p.read_text(encoding="utf-8"), str(p)))

    def tol(self, base: Tolerances = DEFAULT) -> Tolerances:
        return tolerances_from(self.tolerances, base)


def jsonable(x):
    """Plain JSON types for reports (numpy scalars, fractions, enums, tuples)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, float) and not np.isfinite(x):
        return None if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def report_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, ensure_ascii=False) + "\n"
