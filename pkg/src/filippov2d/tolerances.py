"""Numerical tolerances used throughout the package."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

TOL_MIN = 1e-14
TOL_MAX = 1e-2


@dataclass(frozen=True)
class Tolerances:
    on_sigma: float = 1e-9
    tan: float = 1e-9
    root: float = 1e-10
    event: float = 1e-11
    speed: float = 1e-9
    cycle: float = 1e-6
    dedup: float = 1e-6
    max_order: int = 8

    def replace(self, **kw) -> "Tolerances":
        for k, v in kw.items():
            if k == "max_order":
                continue
            if not TOL_MIN <= float(v) <= TOL_MAX:
                raise ValueError(f"tolerance {k}={v} outside [{TOL_MIN}, {TOL_MAX}]")
        return dataclasses.replace(self, **kw)

    def scaled(self, factor: float) -> "Tolerances":
        """All float tolerances multiplied by ``factor`` (used for halving checks)."""
        kw = {f.name: getattr(self, f.name) * factor
              for f in dataclasses.fields(self) if f.name != "max_order"}
        return dataclasses.replace(self, **kw)

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        """Read ``FILIPPOV_TOL_<NAME>`` overrides, e.g. ``FILIPPOV_TOL_TAN=1e-10``."""
        environ = os.environ if environ is None else environ
        kw = {}
        for f in dataclasses.fields(cls):
            key = "FILIPPOV_TOL_" + f.name.upper()
            if key in environ:
                kw[f.name] = int(environ[key]) if f.name == "max_order" else float(environ[key])
        return cls().replace(**kw)


DEFAULT = Tolerances()
