"""Aggregation of per-replication records and report emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError

# column -> parser used when re-reading a records CSV
RECORD_FIELDS = {
    "replication": int,
    "method": str,
    "milestone": int,
    "good": int,
    "n_entered": int,
    "test_error": float,
    "test_corr": float,
    "misclass": int,
    "p_train": float,
    "p_test": float,
    "mean_abs_score": float,
    "refit_fallback": "bool",
    "recovered": "bool",
    "kkt_ok": "bool",
    "kkt_max_violation": float,
    "knots": int,
    "screen_size": int,
    "screen_relaxed": "bool",
    "path_length": int,
    "delta": float,
    "error": str,
}

TABLE_FIELDS = (
    "method", "milestone", "n_ok", "n_error", "good_mean", "good_sd",
    "test_error_mean", "test_corr_mean", "misclass_mean",
    "p_train_mean", "p_test_mean", "mean_abs_score_mean", "refit_fallbacks",
)

METHOD_FIELDS = (
    "method", "n_ok", "n_error", "recovery_rate", "kkt_all_ok", "kkt_max_violation",
    "screen_size_mean", "screen_relaxed",
)

PVALUE_FIELDS = ("method", "replication", "milestone", "split", "p_value")
SCORE_FIELDS = ("method", "replication", "milestone", "mean_abs_score", "test_corr")


@dataclass
class ExperimentReport:
    config: dict
    records: list
    table: list = field(default_factory=list)
    methods: list = field(default_factory=list)

    def cell(self, method, milestone, key):
        for row in self.table:
            if row["method"] == method and row["milestone"] == milestone:
                return row[key]
        raise KeyError((method, milestone))

    def method_row(self, method):
        for row in self.methods:
            if row["method"] == method:
                return row
        raise KeyError(method)

    def errors(self):
        seen = {}
        for r in self.records:
            if r.get("error"):
                seen[(r["replication"], r["method"])] = r["error"]
        return seen


def _mean(vals):
    vals = [v for v in vals if v is not None and not (isinstance(v, float) and math.isnan(v))]
    return float(np.mean(vals)) if vals else None


def _sd(vals):
    vals = [v for v in vals if v is not None]
    if len(vals) < 2:
        return 0.0 if vals else None
    return float(np.std(vals, ddof=1))


def aggregate(records, methods, milestones):
    """Table rows per (method, milestone) and summary rows per method.

    Records carrying an error are counted but excluded from every mean.
    """
    table, summary = [], []
    for m in methods:
        mine = [r for r in records if r["method"] == m]
        for k in milestones:
            rows = [r for r in mine if r["milestone"] == k]
            ok = [r for r in rows if not r.get("error")]
            table.append({
                "method": m,
                "milestone": k,
                "n_ok": len(ok),
                "n_error": len(rows) - len(ok),
                "good_mean": _mean([r.get("good") for r in ok]),
                "good_sd": _sd([r.get("good") for r in ok]),
                "test_error_mean": _mean([r.get("test_error") for r in ok]),
                "test_corr_mean": _mean([r.get("test_corr") for r in ok]),
                "misclass_mean": _mean([r.get("misclass") for r in ok]),
                "p_train_mean": _mean([r.get("p_train") for r in ok]),
                "p_test_mean": _mean([r.get("p_test") for r in ok]),
                "mean_abs_score_mean": _mean([r.get("mean_abs_score") for r in ok]),
                "refit_fallbacks": sum(1 for r in ok if r.get("refit_fallback")),
            })
        first = {}
        for r in mine:
            first.setdefault(r["replication"], r)
        reps = list(first.values())
        ok = [r for r in reps if not r.get("error")]
        rec = [r["recovered"] for r in ok if r.get("recovered") is not None]
        kkt = [r["kkt_ok"] for r in ok if r.get("kkt_ok") is not None]
        viol = [r["kkt_max_violation"] for r in ok if r.get("kkt_max_violation") is not None]
        summary.append({
            "method": m,
            "n_ok": len(ok),
            "n_error": len(reps) - len(ok),
            "recovery_rate": float(np.mean(rec)) if rec else None,
            "kkt_all_ok": all(kkt) if kkt else None,
            "kkt_max_violation": max(viol) if viol else None,
            "screen_size_mean": _mean([r.get("screen_size") for r in ok
                                       if r.get("screen_size")]),
            "screen_relaxed": sum(1 for r in ok if r.get("screen_relaxed")),
        })
    return table, summary


def build_report(config: dict, records) -> ExperimentReport:
    table, summary = aggregate(records, config["methods"], config["milestones"])
    return ExperimentReport(config, list(records), table, summary)


# --- formatting -----------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, np.generic):
        return v.item()
    return v


def _csv_text(fields, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(r.get(f)) for f in fields])
    return buf.getvalue()


def _plot_rows(records):
    pv, sc = [], []
    for r in records:
        if r.get("error"):
            continue
        for split in ("train", "test"):
            p = r.get(f"p_{split}")
            if p is not None:
                pv.append({"method": r["method"], "replication": r["replication"],
                           "milestone": r["milestone"], "split": split, "p_value": p})
        if r.get("mean_abs_score") is not None or r.get("test_corr") is not None:
            sc.append({k: r.get(k) for k in SCORE_FIELDS})
    return pv, sc


def render(report: ExperimentReport, fmt: str = "csv") -> dict:
    """File name -> text for every report artifact."""
    pv, sc = _plot_rows(report.records)
    if fmt == "csv":
        return {
            "table.csv": _csv_text(TABLE_FIELDS, report.table),
            "methods.csv": _csv_text(METHOD_FIELDS, report.methods),
            "replications.csv": _csv_text(tuple(RECORD_FIELDS), report.records),
            "plot_pvalues.csv": _csv_text(PVALUE_FIELDS, pv),
            "plot_scores.csv": _csv_text(SCORE_FIELDS, sc),
            "config.json": json.dumps(report.config, indent=2, sort_keys=True) + "\n",
        }
    if fmt == "json":
        doc = {
            "config": report.config,
            "table": report.table,
            "methods": report.methods,
            "replications": report.records,
            "plot_pvalues": pv,
            "plot_scores": sc,
        }
        doc = json.loads(json.dumps(doc, default=_json_value), parse_constant=lambda c: None)
        return {"report.json": json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"}
    raise InvalidInputError(f"unknown format {fmt!r}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def emit_report(report: ExperimentReport, out_dir, fmt: str = "csv"):
    """Write the report artifacts into ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, text in render(report, fmt).items():
            path = out / name
            path.write_text(text)
            paths.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return paths


# --- re-ingest ------------------------------------------------------------


def _parse(kind, text):
    if text == "":
        return None
    if kind == "bool":
        return text == "true"
    return kind(text)


def load_records(path_or_text):
    """Read a replications CSV back into record dicts."""
    p = Path(str(path_or_text))
    text = p.read_text() if "\n" not in str(path_or_text) and p.exists() else str(path_or_text)
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        rec = {}
        for k, v in row.items():
            if k not in RECORD_FIELDS:
                raise InvalidInputError(f"unexpected column {k!r}")
            rec[k] = _parse(RECORD_FIELDS[k], v)
        out.append(rec)
    return out
