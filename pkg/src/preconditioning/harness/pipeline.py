"""screen -> SPC -> pre-condition -> select -> evaluate, for one method on one replication."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..classify import choose_delta, logit_precondition, nsc_fit, nsc_predict_proba
from ..core import ClassLabels, Continuous, Dataset, SurvivalOutcome, standardize, standardize_like
from ..errors import EmptyScreenError, PreconditioningError, RankError, WrongOutcomeError
from ..screen import ScreenConfig, association_scores, select
from ..spc import SpcModel, fit_spc, precondition, survival_pseudo_response
from ..sparsereg import LassoProblem, forward_stepwise, lars_path, ols_refit
from ..survival import cox_fit_single, cox_scores
from . import metrics
from .config import ExperimentConfig, ScreenRule


@dataclass
class Selection:
    method: str
    entry_order: tuple
    response: np.ndarray
    path: object
    spc: SpcModel = None
    screen_size: int = 0
    screen_relaxed: bool = False
    extra: dict = field(default_factory=dict)


def screened_model(d: Dataset, rule: ScreenRule, k: int):
    """Screen on marginal association, then fit SPC; relaxes to the default
    top-m rule when the configured threshold selects nothing."""
    scores = association_scores(d)
    relaxed = False
    try:
        feats = select(scores, rule.resolve(d.n, d.p))
    except EmptyScreenError:
        feats = select(scores, ScreenConfig.default_for(d.n, d.p))
        relaxed = True
    return fit_spc(d, feats, k), relaxed


def selection_response(method: str, d: Dataset, cfg: ExperimentConfig):
    """The response fed to the selector, plus the SPC model when one is used."""
    oc = d.outcome
    info = {}
    if method in ("spc-fs", "spc-lasso"):
        m, relaxed = screened_model(d, cfg.screen, cfg.k)
        info.update(spc=m, screen_size=len(m.features), screen_relaxed=relaxed)
        if isinstance(oc, SurvivalOutcome):
            return survival_pseudo_response(m, d).y_tilde, info
        y = oc.y if isinstance(oc, Continuous) else oc.labels.astype(float)
        return precondition(m, d, y).y_tilde, info
    if method == "nsc-fs":
        if not isinstance(oc, ClassLabels):
            raise WrongOutcomeError("nsc-fs needs class labels")
        delta = choose_delta(d, criterion=cfg.delta_criterion, seed=cfg.seed)
        probs = nsc_predict_proba(nsc_fit(d, delta), d)
        info["extra"] = {"delta": delta}
        return logit_precondition(probs).values, info
    if isinstance(oc, SurvivalOutcome):
        raise WrongOutcomeError(f"{method} needs a continuous or class outcome; "
                                "survival data supports spc-fs and spc-lasso")
    if isinstance(oc, ClassLabels):
        return oc.labels.astype(float), info
    return oc.y, info


def run_selection(method: str, d: Dataset, cfg: ExperimentConfig, max_entries: int) -> Selection:
    r, info = selection_response(method, d, cfg)
    if method.endswith("lasso"):
        path = lars_path(LassoProblem(d.x, r), max_entries=max_entries)
    else:
        path = forward_stepwise(d.x, r, max_steps=max_entries)
    return Selection(method, tuple(int(j) for j in path.entry_order), np.asarray(r), path,
                     info.get("spc"), info.get("screen_size", 0),
                     info.get("screen_relaxed", False), info.get("extra", {}))


def _coefs_at(sel: Selection, d: Dataset, k: int):
    support = sel.entry_order[:k]
    try:
        return ols_refit(d.x, sel.response, support), False
    except RankError:
        return sel.path.coefs_after_entries(k), True


def _nan():
    return float("nan")


def evaluate(sel: Selection, train: Dataset, test: Dataset, truth, cfg: ExperimentConfig):
    """One record per milestone for a finished selection."""
    rows = []
    x_test = standardize_like(test, train).x if test is not None else None
    cox_z = None
    if isinstance(train.outcome, SurvivalOutcome):
        cox_z = np.abs(np.nan_to_num(cox_scores(train.x, train.outcome)[2], nan=0.0))
    for k in cfg.milestones:
        row = {"milestone": k, "n_entered": min(k, len(sel.entry_order))}
        row["good"] = metrics.count_good(sel.entry_order, truth, k) if truth is not None else None
        beta, fallback = _coefs_at(sel, train, k)
        row["refit_fallback"] = fallback
        fit_train = train.x @ beta
        oc = train.outcome
        if isinstance(oc, Continuous):
            b0 = float(np.mean(oc.y))
            if x_test is not None:
                pred = b0 + x_test @ beta
                row["test_error"] = metrics.mse(test.y, pred)
                row["test_corr"] = metrics.correlation(pred, test.y)
        elif isinstance(oc, ClassLabels):
            if x_test is not None:
                row["misclass"] = _misclass(fit_train, oc.labels, x_test @ beta, test.outcome.labels)
        elif isinstance(oc, SurvivalOutcome):
            entered = list(sel.entry_order[:k])
            row["mean_abs_score"] = float(np.mean(cox_z[entered])) if entered else _nan()
            row["p_train"] = _cox_p(fit_train, oc)
            if x_test is not None:
                row["p_test"] = _cox_p(x_test @ beta, test.outcome)
        rows.append(row)
    return rows


def _misclass(fit_train, lab_train, fit_test, lab_test):
    """Assign each test score to the class whose mean training score is nearest."""
    classes = np.unique(lab_train)
    centers = np.array([fit_train[lab_train == g].mean() for g in classes])
    pred = classes[np.argmin(np.abs(fit_test[:, None] - centers[None, :]), axis=1)]
    return int(np.sum(pred != lab_test))


def _cox_p(score, outcome):
    if np.ptp(score) <= 1e-12 * max(1.0, float(np.max(np.abs(score)))):
        return _nan()
    try:
        return float(cox_fit_single(score, outcome).p_value)
    except PreconditioningError:
        return _nan()


def method_summary(sel: Selection, truth, cfg: ExperimentConfig):
    out = {"screen_size": sel.screen_size, "screen_relaxed": sel.screen_relaxed,
           "path_length": len(sel.entry_order)}
    if hasattr(sel.path, "kkt"):
        out["kkt_ok"] = bool(sel.path.kkt_ok)
        out["kkt_max_violation"] = float(sel.path.max_kkt_violation)
        out["knots"] = int(len(sel.path.knots))
    if truth is not None and cfg.recovery_points > 0:
        if hasattr(sel.path, "kkt"):
            out["recovered"] = metrics.lasso_recovers(sel.path, truth, cfg.recovery_points,
                                                      cfg.recovery_ratio)
        else:
            out["recovered"] = metrics.stepwise_recovers(sel.entry_order, truth)
    if "delta" in sel.extra:
        out["delta"] = sel.extra["delta"]
    return out


def max_entries_for(cfg: ExperimentConfig, truth):
    need = max(cfg.milestones)
    if truth is not None and cfg.recovery_points > 0:
        need = max(need, len(truth) + 1)
    return need


def run_method(method, train, test, truth, cfg):
    """Standardize on train, select, evaluate. Returns (summary, milestone rows)."""
    train_s = standardize(train)
    sel = run_selection(method, train_s, cfg, max_entries_for(cfg, truth))
    rows = evaluate(sel, train_s, test, truth, cfg)
    return method_summary(sel, truth, cfg), rows, sel
