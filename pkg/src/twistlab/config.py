"""Experiment configuration: INI file sections plus command-line overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .curve import CurveModel
from .discriminants import TwistClass, admissible_classes
from .lvalues import DEFAULT_EPS


class ConfigError(ValueError):
    pass


def _parse_traces(text: str) -> dict:
    out = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            p, a = item.split(":")
            out[int(p)] = int(a)
        except ValueError as exc:
            raise ConfigError(f"bad trace override {item!r}; expected p:A") from exc
    return out


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    a2: int = 0
    a1: int = -1
    a0: int = 0
    N: int = 32
    root_number: int = 1
    bad_traces: dict = field(default_factory=lambda: {2: 0})
    classes: str = "all"
    X: float = 20000.0
    X_grid: tuple = (1e4, 3e4, 1e5)
    k: tuple = (1.0,)
    eps: float = DEFAULT_EPS
    trunc_scale: float = 1.0
    partition_c: float = 1.0
    partition_threshold: float = 2.0
    prime_only: bool = False
    output: str | None = None
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.X_grid, self.X_grid[1:])):
            raise ConfigError("X grid must be strictly increasing")
        if self.X <= 0 or any(x <= 0 for x in self.X_grid):
            raise ConfigError("X values must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not 0 < self.eps < 1:
            raise ConfigError("eps must lie in (0, 1)")
        if self.trunc_scale <= 0:
            raise ConfigError("truncation scale must be positive")
        self.twist_classes()  # validates curve and classes

    def curve(self) -> CurveModel:
        try:
            return CurveModel(self.a2, self.a1, self.a0, N=self.N, root_number=self.root_number,
                              bad_prime_traces=dict(self.bad_traces))
        except ValueError as exc:
            raise ConfigError(f"invalid curve: {exc}") from exc

    def twist_classes(self) -> list[TwistClass]:
        curve = self.curve()
        if self.classes.strip().lower() == "all":
            return admissible_classes(curve)
        out = []
        for item in filter(None, (t.strip() for t in self.classes.split(";"))):
            try:
                out.append(TwistClass.parse(curve, item))
            except ValueError as exc:
                raise ConfigError(f"invalid class {item!r}: {exc}") from exc
        if not out:
            raise ConfigError("no twist classes selected")
        return out

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


_SCHEMA = {
    "curve": {"a2": int, "a1": int, "a0": int, "N": int, "root_number": int, "bad_traces": _parse_traces},
    "family": {"classes": str, "prime_only": "bool"},
    "run": {"X": float, "X_grid": _parse_floats, "k": _parse_floats, "eps": float, "trunc_scale": float,
            "workers": int, "seed": int, "output": str},
    "partition": {"c": float, "threshold": float},
}


def load_config(path: str | Path | None = None, text: str | None = None) -> ExperimentConfig:
    """Read an INI file (or string); unknown sections or keys are errors."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        if text is not None:
            parser.read_string(text)
        elif path is not None:
            with open(path) as fh:
                parser.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc

    kw = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser[section].items():
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                value = parser[section].getboolean(key) if conv == "bool" else conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
            name = f"partition_{key}" if section == "partition" else key
            kw[name] = value
    return ExperimentConfig(**kw)
