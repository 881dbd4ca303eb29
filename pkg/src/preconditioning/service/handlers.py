"""Request handlers shared by the HTTP app and the in-process CLI client."""

from __future__ import annotations

import math

import numpy as np

from .. import simgen
from ..core import (
    ClassLabels,
    Continuous,
    Dataset,
    SurvivalOutcome,
    read_csv,
    standardize,
    to_csv,
)
from ..errors import InvalidInputError
from ..harness import ExperimentConfig, ScreenRule, emit_report, preset, run_experiment
from ..harness.pipeline import screened_model, selection_response
from ..screen import association_scores, select
from ..spc import precondition, survival_pseudo_response
from ..sparsereg import LassoProblem, forward_stepwise, lars_path
from . import schemas as s


def load_data(p: s.DataPayload) -> Dataset:
    if p.csv is not None:
        return read_csv(p.csv, outcome=p.outcome, outcome_column=p.outcome_column)
    x = np.asarray(p.x, dtype=float)
    if p.outcome == "continuous":
        if p.y is None:
            raise InvalidInputError("continuous outcome needs y")
        oc = Continuous(p.y)
    elif p.outcome == "survival":
        if p.time is None or p.status is None:
            raise InvalidInputError("survival outcome needs time and status")
        oc = SurvivalOutcome(p.time, p.status)
    else:
        if p.labels is None:
            raise InvalidInputError("class outcome needs labels")
        oc = ClassLabels(p.labels)
    return Dataset(x, oc, p.feature_ids)


def screen_rule(spec: s.ScreenSpec) -> ScreenRule:
    if spec.tau is not None:
        return ScreenRule("tau", spec.tau)
    if spec.top_m is not None:
        return ScreenRule("top_m", spec.top_m)
    if spec.rate is not None:
        return ScreenRule("rate", spec.rate)
    return ScreenRule()


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _finite_or_none(v):
    return None if v is None or not math.isfinite(v) else float(v)


# --- simulate -------------------------------------------------------------


def simulate(req: s.SimulateRequest) -> s.SimulateResponse:
    p = dict(req.params)
    out = dict(generator=req.generator, seed=req.seed, replication=req.replication)
    if req.generator == "example1":
        split = simgen.gen_example1(seed=req.seed, replication=req.replication, **p)
        return s.SimulateResponse(**out, train_csv=to_csv(split.train),
                                  test_csv=to_csv(split.test), truth=list(split.train.truth))
    if req.generator == "example2":
        d = simgen.gen_example2(seed=req.seed, replication=req.replication, **p)
        pop = simgen.example2_population()
        return s.SimulateResponse(**out, train_csv=to_csv(d), truth=list(d.truth),
                                  oracle={"beta": _floats(pop["beta"]),
                                          "marginal_correlation": _floats(pop["corr"])})
    if req.generator == "example3":
        d = simgen.gen_example3(seed=req.seed, replication=req.replication, **p)
        return s.SimulateResponse(**out, train_csv=to_csv(d), truth=list(d.truth))
    if req.generator == "factor":
        spec = (simgen.FactorModelSpec.from_dict(p["spec"]) if "spec" in p
                else simgen.consistency_spec(**p))
    else:
        spec = simgen.prop5_spec(**p)
    d, _ = simgen.gen_factor_model(spec, req.seed, req.replication)
    orc = simgen.oracle(spec)
    value, ok = simgen.irrepresentable_check(spec)
    support = np.flatnonzero(np.abs(orc.sigma_py) > 0)
    oracle = {
        "sigma_eps2": float(orc.sigma_eps2),
        "support": support.tolist(),
        "theta": _floats(orc.theta[support]),
        "sigma_py": _floats(orc.sigma_py[support]),
        "irrepresentable": float(value),
        "irrepresentable_pass": bool(ok),
    }
    return s.SimulateResponse(**out, train_csv=to_csv(d), truth=list(d.truth),
                              spec=spec.to_dict(), oracle=oracle)


# --- screen ---------------------------------------------------------------


def screen(req: s.ScreenRequest) -> s.ScreenResponse:
    d = standardize(load_data(req.data))
    scores = association_scores(d)
    rule = screen_rule(req.screen)
    cfg = rule.resolve(d.n, d.p)
    chosen = set(select(scores, cfg).indices)
    rows = [s.ScoreRow(feature_id=fid, score=float(scores.score[j]), selected=j in chosen)
            for j, fid in enumerate(d.feature_ids)]
    return s.ScreenResponse(kind=scores.kind, rule={"tau": cfg.tau, "top_m": cfg.top_m},
                            n_selected=len(chosen), scores=rows)


# --- fit ------------------------------------------------------------------


def _named(d, coefs):
    return {d.feature_ids[j]: float(coefs[j]) for j in np.flatnonzero(coefs)}


def fit(req: s.FitRequest) -> s.FitResponse:
    d = standardize(load_data(req.data))
    rule = screen_rule(req.screen)
    base = dict(method=req.method, n=d.n, p=d.p)
    if req.method == "spc":
        m, relaxed = screened_model(d, rule, req.k)
        if isinstance(d.outcome, SurvivalOutcome):
            pr = survival_pseudo_response(m, d)
        else:
            y = d.y if isinstance(d.outcome, Continuous) else d.outcome.labels.astype(float)
            pr = precondition(m, d, y)
        return s.FitResponse(**base, selected=[d.feature_ids[j] for j in m.features],
                             eigenvalues=_floats(m.eigvals),
                             spc_coefficients=_floats(pr.regression_coefs),
                             y_tilde=_floats(pr.y_tilde), screen_relaxed=relaxed)
    cfg = ExperimentConfig(methods=(req.method,), k=req.k,
                           screen=rule, seed=req.seed)
    r, info = selection_response(req.method, d, cfg)
    out = dict(base, screen_relaxed=info.get("screen_relaxed", False))
    if "spc" in info:
        out["eigenvalues"] = _floats(info["spc"].eigvals)
        out["y_tilde"] = _floats(r)
    if req.method.endswith("lasso"):
        prob = LassoProblem(d.x, r, penalty_scale=req.penalty_scale)
        mu_min = req.mu if req.mu is not None else 0.0
        path = lars_path(prob, mu_min=mu_min, max_entries=req.max_steps)
        mu_per_n = prob.to_per_n(req.mu) if req.mu is not None else path.knots[-1]
        coefs = path.coef_at(mu_per_n)
        out.update(mu=float(prob.from_per_n(mu_per_n)), penalty_scale=req.penalty_scale)
        order = path.entry_order
    else:
        path = forward_stepwise(d.x, r, max_steps=req.max_steps)
        coefs = path.coefs_after_entries(len(path.entry_order))
        order = path.entry_order
        if req.method == "nsc-fs":
            out["delta"] = info.get("extra", {}).get("delta")
            out["misclassified"] = _stepwise_misclass(d, path)
    out["intercept"] = float(np.mean(r) - d.x.mean(axis=0) @ coefs)
    return s.FitResponse(**out, selected=[d.feature_ids[j] for j in np.flatnonzero(coefs)],
                         entry_order=[d.feature_ids[j] for j in order],
                         coefficients=_named(d, coefs))


def _stepwise_misclass(d, path):
    """Training misclassifications after each stepwise entry (nearest class mean of scores)."""
    lab = d.outcome.labels
    classes = np.unique(lab)
    out = []
    for k in range(1, len(path.entry_order) + 1):
        f = d.x @ path.coefs_after_entries(k)
        centers = np.array([f[lab == g].mean() for g in classes])
        pred = classes[np.argmin(np.abs(f[:, None] - centers[None, :]), axis=1)]
        out.append(int(np.sum(pred != lab)))
    return out


# --- path -----------------------------------------------------------------


def path(req: s.PathRequest) -> s.PathResponse:
    d = standardize(load_data(req.data))
    if req.response == "spc":
        cfg = ExperimentConfig(methods=("spc-lasso",), k=req.k, screen=screen_rule(req.screen))
        r, _ = selection_response("spc-lasso", d, cfg)
    else:
        r = d.y
    prob = LassoProblem(d.x, r, penalty_scale=req.penalty_scale)
    lp = lars_path(prob, max_entries=req.max_entries)
    scaled = lp.knots * (d.n if req.penalty_scale == "raw" else 1.0)
    rows = []
    for i, mu in enumerate(scaled):
        for j in np.flatnonzero(lp.coefs[i]):
            rows.append(s.KnotRow(knot=i, mu=float(mu), feature=d.feature_ids[j],
                                  coefficient=float(lp.coefs[i, j])))
    events = [[kind, d.feature_ids[j] if j >= 0 else None] for kind, j in lp.events]
    return s.PathResponse(penalty_scale=req.penalty_scale, n_knots=len(scaled),
                          mu=_floats(scaled), entry_order=[d.feature_ids[j] for j in lp.entry_order],
                          events=events, kkt_ok=lp.kkt_ok,
                          max_kkt_violation=float(lp.max_kkt_violation), knots=rows)


# --- experiment -----------------------------------------------------------


def experiment(req: s.ExperimentRequest) -> s.ExperimentResponse:
    base = preset(req.preset).to_dict() if req.preset else {}
    base.update(req.config)
    base["format"] = req.format
    if req.output is not None:
        base["output"] = req.output
    cfg = ExperimentConfig.from_dict(base)
    report = run_experiment(cfg)
    files = []
    if cfg.output:
        files = [str(p) for p in emit_report(report, cfg.output, cfg.format)]
    return s.ExperimentResponse(config=report.config, table=_clean(report.table),
                                methods=_clean(report.methods), errors=len(report.errors()),
                                files=files)


def _clean(rows):
    return [{k: _finite_or_none(v) if isinstance(v, float) else v for k, v in r.items()}
            for r in rows]
