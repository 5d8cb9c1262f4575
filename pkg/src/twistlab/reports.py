"""Immutable experiment reports with lossless JSON/CSV round trips."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field


def q12(x):
    """Round to 12 significant digits; the printed form then parses back to the same float."""
    if x is None:
        return None
    if isinstance(x, bool) or isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def _q_tree(obj):
    if isinstance(obj, dict):
        return {str(k): _q_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_q_tree(v) for v in obj]
    if isinstance(obj, float):
        return q12(obj)
    if hasattr(obj, "item"):  # numpy scalar
        return _q_tree(obj.item())
    return obj


def _encode_float(x):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _decode_float(x):
    if isinstance(x, str):
        return float(x)
    return x


@dataclass(frozen=True)
class MomentReport:
    label: str
    X: float
    k: float
    empirical: float
    oracle: float
    rel_err: float | None = None
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("X", "k", "empirical", "oracle", "runtime_s"):
            object.__setattr__(self, name, q12(getattr(self, name)))
        if self.rel_err is None and self.oracle not in (None, 0.0):
            object.__setattr__(self, "rel_err", abs(self.empirical / self.oracle - 1.0))
        object.__setattr__(self, "rel_err", q12(self.rel_err))
        object.__setattr__(self, "extra", _q_tree(dict(self.extra)))

    @property
    def ratio(self) -> float | None:
        return None if not self.oracle else self.empirical / self.oracle

    def to_dict(self, include_runtime: bool = True) -> dict:
        out = asdict(self)
        if not include_runtime:
            out.pop("runtime_s")
        out["empirical"] = _encode_float(out["empirical"])
        out["oracle"] = _encode_float(out["oracle"])
        return out

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MomentReport":
        raw = json.loads(text)
        raw["empirical"] = _decode_float(raw["empirical"])
        raw["oracle"] = _decode_float(raw["oracle"])
        raw.setdefault("runtime_s", 0.0)
        return cls(**raw)


@dataclass(frozen=True)
class DistributionReport:
    label: str
    X: float
    V: tuple
    tail: tuple
    gaussian_tail: tuple
    sample_size: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "V", tuple(q12(v) for v in self.V))
        object.__setattr__(self, "tail", tuple(q12(v) for v in self.tail))
        object.__setattr__(self, "gaussian_tail", tuple(q12(v) for v in self.gaussian_tail))
        object.__setattr__(self, "X", q12(self.X))
        object.__setattr__(self, "extra", _q_tree(dict(self.extra)))
        if any(not 0.0 <= t <= 1.0 for t in self.tail):
            raise ValueError("tail frequencies must lie in [0, 1]")
        if any(b > a for a, b in zip(self.tail, self.tail[1:])):
            raise ValueError("tail frequencies must be weakly decreasing in V")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["V", "empirical_tail", "gaussian_tail"])
        for row in zip(self.V, self.tail, self.gaussian_tail):
            w.writerow([f"{x:.12g}" for x in row])
        return buf.getvalue()

    def to_json(self) -> str:
        d = asdict(self)
        d["V"], d["tail"], d["gaussian_tail"] = list(self.V), list(self.tail), list(self.gaussian_tail)
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DistributionReport":
        return cls(**json.loads(text))
