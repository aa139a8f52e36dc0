"""JSON run configuration.

Numbers in matrices and g tables may be given as JSON numbers or, better,
as decimal strings (``"0.3"``); strings are parsed exactly. A config can
name a built-in system instead of spelling it out::

    {"system": "paper-example", "max_period": 8}
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .cocycle import (
    BUILTIN_FAMILIES,
    Cocycle,
    ConstantCocycle,
    ConstantG,
    GFunction,
    RunLengthCocycle,
    TableCocycle,
    TableG,
    builtin_cocycle,
    paper_example,
)
from .errors import ConfigError
from .matrix import DEFAULT_DIGITS
from .sft import TransitionMatrix
from .traces import NORM_KINDS, system_fingerprint

DEFAULT_MAX_PERIOD = 8


def parse_g(obj) -> GFunction:
    if not isinstance(obj, dict):
        raise ConfigError("'g' must be an object")
    kind = obj.get("type")
    if kind == "constant":
        return ConstantG(obj["value"])
    if kind == "table":
        return TableG(int(obj["depth"]), obj["values"])
    raise ConfigError(f"unknown g type {kind!r}")


def parse_cocycle(obj) -> Cocycle:
    if not isinstance(obj, dict):
        raise ConfigError("'cocycle' must be an object")
    kind = obj.get("type")
    if kind == "constant":
        return ConstantCocycle(obj["matrix"])
    if kind == "table":
        return TableCocycle(int(obj["depth"]), obj["values"])
    if kind == "run_length":
        if "builtin" in obj:
            c = builtin_cocycle(obj["builtin"])
            if int(obj.get("symbol", 0)) != c.symbol:
                raise ConfigError("built-in run_length families use symbol 0")
            return c
        return RunLengthCocycle(int(obj.get("symbol", 0)), obj["family"])
    raise ConfigError(f"unknown cocycle type {kind!r}")


@dataclass
class RunConfig:
    transitions: TransitionMatrix
    g: GFunction
    cocycle: Cocycle
    max_period: int = DEFAULT_MAX_PERIOD
    precision_digits: int = DEFAULT_DIGITS
    norms: tuple = NORM_KINDS
    cache_dir: str | None = None
    output: str | None = None
    c: float | None = None

    def __post_init__(self):
        if self.max_period < 1:
            raise ConfigError("max_period must be >= 1")
        if self.precision_digits < 30:
            raise ConfigError("precision_digits must be >= 30")
        bad = [k for k in self.norms if k not in NORM_KINDS]
        if bad:
            raise ConfigError(f"unknown norm(s) {bad}")

    @classmethod
    def builtin(cls, name: str, **kw) -> "RunConfig":
        if name not in BUILTIN_FAMILIES:
            raise ConfigError(f"unknown built-in system {name!r}")
        T, g, c = paper_example(literal=name.endswith("literal"))
        return cls(T, g, c, **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        try:
            kw = {}
            for key in ("max_period", "precision_digits"):
                if key in data:
                    kw[key] = int(data[key])
            if "norms" in data:
                kw["norms"] = tuple(data["norms"])
            for key in ("cache_dir", "output"):
                if data.get(key) is not None:
                    kw[key] = str(data[key])
            if data.get("c") is not None:
                kw["c"] = float(data["c"])
            if "system" in data:
                return cls.builtin(data["system"], **kw)
            T = TransitionMatrix(data["transitions"])
            return cls(T, parse_g(data["g"]), parse_cocycle(data["cocycle"]), **kw)
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"missing config field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        """Read a JSON file, or build a built-in system when ``path`` is its name."""
        if str(path) in BUILTIN_FAMILIES and not Path(path).exists():
            return cls.builtin(str(path))
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {
            "transitions": self.transitions.as_lists(),
            "g": self.g.describe(),
            "cocycle": self.cocycle.describe(),
            "max_period": self.max_period,
            "precision_digits": self.precision_digits,
            "norms": list(self.norms),
        }
        for key in ("cache_dir", "output", "c"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def fingerprint(self) -> str:
        return system_fingerprint(self.transitions, self.g, self.cocycle, self.precision_digits)
