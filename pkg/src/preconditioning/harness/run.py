"""Experiment driver."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

from ..errors import PreconditioningError
from .config import ExperimentConfig
from .generators import make_replication
from .pipeline import run_method
from .report import RECORD_FIELDS, ExperimentReport, build_report

log = logging.getLogger(__name__)


def _blank(rep, method, milestone):
    rec = dict.fromkeys(RECORD_FIELDS)
    rec.update(replication=rep, method=method, milestone=milestone)
    return rec


def run_replication(cfg: ExperimentConfig, rep: int):
    """Records for every (method, milestone) of one replication."""
    data = make_replication(cfg, rep)
    records = []
    for method in cfg.methods:
        try:
            summary, rows, _ = run_method(method, data.train, data.test, data.truth, cfg)
        except PreconditioningError as exc:
            log.warning("replication %d, %s: %s", rep, method, exc)
            for k in cfg.milestones:
                rec = _blank(rep, method, k)
                rec["error"] = f"{exc.code}: {exc}"
                records.append(rec)
            continue
        for row in rows:
            rec = _blank(rep, method, row["milestone"])
            rec.update({k: v for k, v in row.items() if k in RECORD_FIELDS})
            rec.update({k: v for k, v in summary.items() if k in RECORD_FIELDS})
            records.append(rec)
    return records


def _job(args):
    cfg, rep = args
    return run_replication(cfg, rep)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every replication and aggregate; a pure function of the config."""
    reps = range(cfg.replications)
    if cfg.workers > 1 and cfg.replications > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_job, [(cfg, r) for r in reps]))
    else:
        chunks = [run_replication(cfg, r) for r in reps]
    records = [rec for chunk in chunks for rec in chunk]
    return build_report(cfg.to_dict(), records)
