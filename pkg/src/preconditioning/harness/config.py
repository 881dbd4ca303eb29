"""Experiment configuration, JSON loading and named presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..errors import InvalidInputError
from ..screen import ScreenConfig

GENERATORS = ("example1", "example2", "example3", "factor", "prop5", "csv-input")
METHODS = ("fs", "spc-fs", "lasso", "spc-lasso", "nsc-fs")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ScreenRule:
    """How the screened set is chosen for a dataset of shape (n, p).

    ``kind`` is "default" (top-m fallback rule), "tau", "top_m", or "rate"
    (tau = value * sqrt(log p / n)).
    """

    kind: str = "default"
    value: float = None

    def __post_init__(self):
        if self.kind not in ("default", "tau", "top_m", "rate"):
            raise InvalidInputError(f"unknown screen rule {self.kind!r}")
        if self.kind != "default" and self.value is None:
            raise InvalidInputError(f"screen rule {self.kind!r} needs a value")
        if self.kind == "top_m" and int(self.value) < 1:
            raise InvalidInputError("top_m must be >= 1")
        if self.kind in ("tau", "rate") and self.value < 0:
            raise InvalidInputError("screen threshold must be non-negative")

    def resolve(self, n, p) -> ScreenConfig:
        if self.kind == "tau":
            return ScreenConfig(tau=float(self.value))
        if self.kind == "top_m":
            return ScreenConfig(top_m=int(self.value))
        if self.kind == "rate":
            return ScreenConfig.from_rate(n, p, float(self.value))
        return ScreenConfig.default_for(n, p)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def parse(cls, obj):
        if obj is None:
            return cls()
        if isinstance(obj, ScreenRule):
            return obj
        if isinstance(obj, dict):
            if "kind" in obj:
                return cls(obj["kind"], obj.get("value"))
            for key in ("tau", "top_m", "rate"):
                if key in obj:
                    return cls(key, obj[key])
            if not obj:
                return cls()
        raise InvalidInputError(f"cannot read screen rule from {obj!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    generator: str = "example1"
    methods: tuple = ("fs", "spc-fs", "lasso", "spc-lasso")
    replications: int = 20
    milestones: tuple = (1, 5, 10, 20)
    k: int = 1
    screen: ScreenRule = field(default_factory=ScreenRule)
    seed: int = 0
    output: str = None
    format: str = "csv"
    params: dict = field(default_factory=dict)
    # exact-recovery check: geometric grid of this many penalties from mu_max down
    recovery_points: int = 20
    recovery_ratio: float = 1e-3
    delta_criterion: str = "cv"
    workers: int = 1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise InvalidInputError(f"unknown generator {self.generator!r}",
                                    allowed=list(GENERATORS))
        methods = tuple(self.methods)
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise InvalidInputError(f"unknown method(s) {bad}", allowed=list(METHODS))
        if len(set(methods)) != len(methods):
            raise InvalidInputError("methods must be distinct")
        if int(self.replications) < 1:
            raise InvalidInputError("replications must be >= 1")
        ms = tuple(int(m) for m in self.milestones)
        if not ms or ms[0] < 1 or any(b <= a for a, b in zip(ms, ms[1:])):
            raise InvalidInputError("milestones must be ascending integers >= 1")
        if int(self.k) < 1:
            raise InvalidInputError("k must be >= 1")
        if self.format not in FORMATS:
            raise InvalidInputError(f"unknown format {self.format!r}")
        if self.delta_criterion not in ("cv", "train"):
            raise InvalidInputError("delta_criterion must be 'cv' or 'train'")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "milestones", ms)
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "screen", ScreenRule.parse(self.screen))
        object.__setattr__(self, "params", dict(self.params or {}))

    def to_dict(self):
        out = asdict(self)
        out["methods"] = list(self.methods)
        out["milestones"] = list(self.milestones)
        out["screen"] = self.screen.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        base = {}
        if "preset" in d:
            base = preset(d.pop("preset")).to_dict()
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        base.update(d)
        return cls(**base)

    def override(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "screen" in kw:
            kw["screen"] = ScreenRule.parse(kw["screen"])
        return replace(self, **kw)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InvalidInputError("config must be a JSON object")
    return ExperimentConfig.from_dict(raw)


_PRESETS = {
    "table1": dict(generator="example1", replications=20, milestones=(1, 5, 10, 20)),
    "table2": dict(generator="example2", methods=("lasso", "spc-lasso"), replications=50,
                   milestones=(1, 2, 3, 4), screen=ScreenRule("rate", 2.0)),
    "table3": dict(generator="example3", methods=("lasso", "spc-lasso"), replications=100,
                   milestones=(5, 10, 20, 50)),
    "consistency": dict(generator="factor", methods=("lasso", "spc-lasso"), replications=30,
                        milestones=(5, 10, 20), screen=ScreenRule("rate", 2.0),
                        params={"family": "consistency", "n": 400}),
    "prop5": dict(generator="prop5", methods=("lasso", "spc-lasso"), replications=50,
                  milestones=(5, 10, 20), screen=ScreenRule("rate", 2.0),
                  params={"n": 400, "alpha": 0.5}),
    "classification": dict(generator="example1", methods=("fs", "nsc-fs"), replications=10,
                           milestones=(1, 5, 10), params={"outcome": "class"}),
}


def preset_names():
    return tuple(_PRESETS)


def preset(name: str) -> ExperimentConfig:
    if name not in _PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}", allowed=list(_PRESETS))
    return ExperimentConfig(**_PRESETS[name])
