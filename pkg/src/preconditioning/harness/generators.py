"""Per-replication data for each generator kind."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import simgen
from ..core import Dataset, read_csv, split
from ..errors import InvalidInputError
from .config import ExperimentConfig


@dataclass(frozen=True)
class Replication:
    index: int
    train: Dataset
    test: Dataset = None
    truth: tuple = None


def _row_split(d: Dataset, n: int):
    if d.n == n:
        return d, None
    return d.take_rows(np.arange(n)), d.take_rows(np.arange(n, d.n))


def _factor_spec(params):
    params = dict(params)
    family = params.pop("family", None)
    params.pop("n_test", None)
    if "spec" in params:
        return simgen.FactorModelSpec.from_dict(params["spec"])
    if family in (None, "consistency"):
        return simgen.consistency_spec(**params)
    raise InvalidInputError(f"unknown factor family {family!r}")


def _replication_seed(seed, rep):
    return int(np.random.SeedSequence([int(seed), int(rep)]).generate_state(1)[0])


@lru_cache(maxsize=4)
def _prop5_spec(items):
    return simgen.prop5_spec(**dict(items))


def make_replication(cfg: ExperimentConfig, rep: int) -> Replication:
    """Generate (or load and split) the data for replication ``rep``."""
    p = dict(cfg.params)
    g = cfg.generator
    seed = cfg.seed
    if g == "example1":
        outcome = p.pop("outcome", "continuous")
        s = simgen.gen_example1(seed=seed, replication=rep, **p)
        train, test = s.train, s.test
        if outcome == "class":
            train, test = simgen.to_classes(train), simgen.to_classes(test)
        elif outcome != "continuous":
            raise InvalidInputError(f"example1 outcome must be continuous or class, not {outcome!r}")
        return Replication(rep, train, test, train.truth)
    n_test = int(p.pop("n_test", 0))
    if g == "example2":
        n = int(p.pop("n", 300))
        d = simgen.gen_example2(n=n + n_test, seed=seed, replication=rep, **p)
    elif g == "example3":
        n = int(p.pop("n", 50))
        d = simgen.gen_example3(n=n + n_test, seed=seed, replication=rep, **p)
    elif g == "factor":
        spec = _factor_spec(p)
        n = spec.n
        d, _ = simgen.gen_factor_model(spec, seed, rep, n=n + n_test)
    elif g == "prop5":
        spec = _prop5_spec(tuple(sorted(p.items())))
        n = spec.n
        d, _ = simgen.gen_factor_model(spec, seed, rep, n=n + n_test)
    elif g == "csv-input":
        return _csv_replication(cfg, rep)
    else:  # pragma: no cover - guarded by the config
        raise InvalidInputError(f"unknown generator {g!r}")
    train, test = _row_split(d, n)
    return Replication(rep, train, test, d.truth)


def _csv_replication(cfg, rep):
    p = cfg.params
    if "path" not in p:
        raise InvalidInputError("csv-input needs params.path")
    d = read_csv(p["path"], outcome=p.get("outcome", "continuous"),
                 outcome_column=p.get("outcome_column", "y"))
    truth = None
    if p.get("truth"):
        pos = {fid: j for j, fid in enumerate(d.feature_ids)}
        missing = [t for t in p["truth"] if str(t) not in pos]
        if missing:
            raise InvalidInputError(f"truth features not in the file: {missing}")
        truth = tuple(pos[str(t)] for t in p["truth"])
        d = Dataset(d.x, d.outcome, d.feature_ids, truth=truth)
    frac = float(p.get("train_fraction", 0.5))
    if frac >= 1.0:
        return Replication(rep, d, None, truth)
    s = split(d, frac, _replication_seed(cfg.seed, rep))
    return Replication(rep, s.train, s.test, truth)
