"""Branch-selection policies for the non-deterministic points of a trajectory.

A choice is one of ``"X"``, ``"Y"`` or ``"S"`` (slide).  A slide may carry a
dwell and an exit field, written ``"X+1.5"``: slide for 1.5 time units, then
leave with X (if X departs at that point).  ``"X@-0.5"`` slides until the
curve parameter reaches -0.5 and leaves there with X.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

TAGS = ("AlwaysX", "AlwaysY", "StaySliding", "Scripted", "SeededRandom")
_NUM = r"[-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?\d+)?"
_TOKEN = re.compile(rf"^(X|Y|S)(?:([+@])({_NUM}))?$")


@dataclass(frozen=True)
class Choice:
    option: str               # X | Y | S
    dwell: float | None = None
    exit_field: str | None = None
    exit_at: float | None = None

    def __str__(self) -> str:
        if self.dwell is not None:
            return f"{self.exit_field}+{self.dwell:.17g}"
        if self.exit_at is not None:
            return f"{self.exit_field}@{self.exit_at:.17g}"
        return self.option


def parse_token(tok: str) -> Choice:
    m = _TOKEN.match(tok.strip())
    if not m:
        raise ValueError(f"bad policy token {tok!r}")
    head, op, num = m.group(1), m.group(2), m.group(3)
    if op is None:
        return Choice(head)
    if head == "S":
        raise ValueError("a dwell needs an exit field, e.g. 'X+1.0'")
    if op == "@":
        return Choice("S", None, head, float(num))
    return Choice("S", float(num), head)


def parse_script(text: str) -> tuple[Choice, ...]:
    """``"XSYX"`` or ``"X, Y+0.5, S"``."""
    text = text.strip()
    if not text:
        return ()
    if any(c in text for c in ",+@ "):
        return tuple(parse_token(t) for t in re.split(r"[,\s]+", text) if t)
    return tuple(parse_token(c) for c in text)


@dataclass(frozen=True)
class Policy:
    tag: str = "StaySliding"
    script: tuple[Choice, ...] = ()
    seed: int = 0
    repeat: bool = False
    dwell_max: float = 4.0
    stay_prob: float = 0.0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"policy must be one of {TAGS}")

    @classmethod
    def always_x(cls) -> "Policy":
        return cls("AlwaysX")

    @classmethod
    def always_y(cls) -> "Policy":
        return cls("AlwaysY")

    @classmethod
    def stay_sliding(cls) -> "Policy":
        return cls("StaySliding")

    @classmethod
    def scripted(cls, script, repeat: bool = False) -> "Policy":
        if isinstance(script, str):
            script = parse_script(script)
        else:
            script = tuple(parse_token(t) if isinstance(t, str) else t for t in script)
        return cls("Scripted", script, repeat=repeat)

    @classmethod
    def seeded(cls, seed: int, dwell_max: float = 4.0, stay_prob: float = 0.0) -> "Policy":
        return cls("SeededRandom", seed=seed, dwell_max=dwell_max, stay_prob=stay_prob)

    @classmethod
    def from_spec(cls, spec) -> "Policy":
        """``"AlwaysX"`` or ``{"tag": "Scripted", "script": "X", "repeat": true}``."""
        if isinstance(spec, str):
            spec = {"tag": spec}
        if not isinstance(spec, dict) or "tag" not in spec:
            raise ValueError(f"bad policy spec {spec!r}")
        extra = set(spec) - {"tag", "script", "seed", "repeat", "dwell_max", "stay_prob"}
        if extra:
            raise ValueError(f"unknown policy keys {sorted(extra)}")
        tag = spec["tag"]
        if tag == "Scripted":
            return cls.scripted(spec.get("script", ""), bool(spec.get("repeat", False)))
        if tag == "SeededRandom":
            return cls.seeded(int(spec.get("seed", 0)), float(spec.get("dwell_max", 4.0)),
                              float(spec.get("stay_prob", 0.0)))
        return cls(tag)

    def to_spec(self) -> dict:
        d = {"tag": self.tag}
        if self.tag == "Scripted":
            d["script"] = ",".join(map(str, self.script))
            d["repeat"] = self.repeat
        elif self.tag == "SeededRandom":
            d.update(seed=self.seed, dwell_max=self.dwell_max, stay_prob=self.stay_prob)
        return d

    def start(self) -> "PolicyState":
        return PolicyState(self)

    def describe(self) -> str:
        if self.tag == "Scripted":
            return "Scripted(" + ",".join(map(str, self.script)) + (")*" if self.repeat else ")")
        if self.tag == "SeededRandom":
            return f"SeededRandom(seed={self.seed}, dwell_max={self.dwell_max}, stay_prob={self.stay_prob})"
        return self.tag


_PREFERENCE = {
    "AlwaysX": ("X", "S", "Y"),
    "AlwaysY": ("Y", "S", "X"),
    "StaySliding": ("S", "X", "Y"),
}


class PolicyState:
    """Mutable cursor over a policy (one per simulation run)."""

    def __init__(self, policy: Policy):
        self.policy = policy
        self.index = 0
        self.rng = np.random.default_rng(policy.seed)

    def choose(self, options: list[str]) -> tuple[Choice, bool]:
        """Pick among ``options``; the flag is False when a script token did not fit."""
        pol = self.policy
        if pol.tag in _PREFERENCE:
            for o in _PREFERENCE[pol.tag]:
                if o in options:
                    return Choice(o), True
        if pol.tag == "Scripted":
            if self.index >= len(pol.script) and pol.repeat and pol.script:
                self.index = 0
            if self.index < len(pol.script):
                c = pol.script[self.index]
                self.index += 1
                if c.option in options:
                    return c, True
                return _default(options), False
            return _default(options), True
        # SeededRandom
        o = options[int(self.rng.integers(len(options)))]
        if o == "S" and self.rng.random() >= pol.stay_prob:
            dwell = float(self.rng.uniform(0.0, pol.dwell_max))
            exit_field = "X" if self.rng.random() < 0.5 else "Y"
            return Choice("S", dwell, exit_field), True
        return Choice(o), True


def _default(options: list[str]) -> Choice:
    for o in ("S", "X", "Y"):
        if o in options:
            return Choice(o)
    raise ValueError("no options")
