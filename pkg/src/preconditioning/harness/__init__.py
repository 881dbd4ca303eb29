"""Experiment configuration, pipelines, metrics and reports."""

from .config import ExperimentConfig, ScreenRule, load_config, preset, preset_names
from .generators import Replication, make_replication
from .metrics import count_good, lasso_recovers, stepwise_recovers
from .pipeline import evaluate, run_method, run_selection, screened_model
from .report import (
    ExperimentReport,
    aggregate,
    build_report,
    emit_report,
    load_records,
    render,
)
from .run import run_experiment, run_replication

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "Replication",
    "ScreenRule",
    "aggregate",
    "build_report",
    "count_good",
    "emit_report",
    "evaluate",
    "lasso_recovers",
    "load_config",
    "load_records",
    "make_replication",
    "preset",
    "preset_names",
    "render",
    "run_experiment",
    "run_method",
    "run_replication",
    "run_selection",
    "screened_model",
    "stepwise_recovers",
]
