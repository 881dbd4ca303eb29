"""Cox partial-likelihood score statistics and one-covariate Cox fits.

Ties between event times use the Breslow convention throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import SurvivalOutcome
from .errors import DegenerateCovariateError, NoEventsError


@dataclass(frozen=True)
class CoxScore:
    u: float
    v: float
    z: float


@dataclass(frozen=True)
class CoxFit:
    beta: float
    se: float
    p_value: float
    converged: bool
    monotone: bool = False
    test: str = "wald"


def _risk_sums(x, o: SurvivalOutcome, beta=0.0):
    """Risk-set sums S0, S1, S2 evaluated at every event, columnwise.

    ``x`` is n x m. Returns arrays of shape (events, m).
    """
    if o.status.sum() == 0:
        raise NoEventsError("no events: every observation is censored")
    order = np.argsort(o.time, kind="stable")
    t = o.time[order]
    xs = x[order]
    w = np.exp(beta * xs) if np.any(beta) else np.ones_like(xs)
    first = np.searchsorted(t, t, side="left")
    s0 = np.cumsum(w[::-1], axis=0)[::-1][first]
    s1 = np.cumsum((w * xs)[::-1], axis=0)[::-1][first]
    s2 = np.cumsum((w * xs * xs)[::-1], axis=0)[::-1][first]
    ev = o.status[order] == 1
    return xs[ev], s0[ev], s1[ev], s2[ev]


def cox_scores(x, o: SurvivalOutcome):
    """Vectorized score statistics for every column of ``x`` (n x m).

    Returns ``(u, v, z)`` arrays; ``z`` is nan where the information is zero.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    # centering leaves u and v unchanged and keeps S2/S0 - mean^2 well conditioned
    x = x - x.mean(axis=0)
    xe, s0, s1, s2 = _risk_sums(x, o)
    mean = s1 / s0
    u = np.sum(xe - mean, axis=0)
    v = np.sum(np.maximum(s2 / s0 - mean**2, 0.0), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(v > 0, u / np.sqrt(v), np.nan)
    return u, v, z


def cox_score(x_col, o: SurvivalOutcome) -> CoxScore:
    u, v, z = cox_scores(np.asarray(x_col, dtype=float).ravel(), o)
    if not v[0] > 0:
        raise DegenerateCovariateError("zero information: covariate constant over every risk set")
    return CoxScore(float(u[0]), float(v[0]), float(z[0]))


def log_partial_likelihood(beta, x_col, o: SurvivalOutcome):
    x = np.asarray(x_col, dtype=float).ravel()
    x = x - x.mean()
    xe, s0, _, _ = _risk_sums(x[:, None], o, beta)
    return float(np.sum(beta * xe[:, 0] - np.log(s0[:, 0])))


def _score_info(beta, x, o):
    xe, s0, s1, s2 = _risk_sums(x[:, None], o, beta)
    mean = s1 / s0
    u = float(np.sum(xe - mean))
    info = float(np.sum(np.maximum(s2 / s0 - mean**2, 0.0)))
    return u, info


def cox_fit_single(x_col, o: SurvivalOutcome, max_iter=100, tol=1e-9) -> CoxFit:
    """Newton fit of a one-covariate Cox model with a two-sided Wald p-value.

    When the likelihood is monotone (the estimate runs off to infinity) or
    Newton fails, the score-test p-value is reported instead and the fit is
    flagged.
    """
    x = np.asarray(x_col, dtype=float).ravel()
    x = x - x.mean()
    sc = cox_score(x, o)
    score_p = float(2 * stats.norm.sf(abs(sc.z)))
    bound = 30.0 / max(np.std(x), 1e-300)
    beta = 0.0
    loglik = log_partial_likelihood(beta, x, o)
    converged = False
    for _ in range(max_iter):
        u, info = _score_info(beta, x, o)
        if info <= 0:
            break
        step = u / info
        new = beta + step
        new_ll = log_partial_likelihood(new, x, o)
        halvings = 0
        while new_ll < loglik - 1e-12 and halvings < 30:
            step /= 2
            new = beta + step
            new_ll = log_partial_likelihood(new, x, o)
            halvings += 1
        beta, loglik = new, new_ll
        if abs(beta) > bound:
            break
        if abs(step) < tol * (1 + abs(beta)):
            converged = True
            break
    if not converged:
        return CoxFit(float(beta), float("inf"), score_p, False, True, "score")
    _, info = _score_info(beta, x, o)
    if info <= 0:
        return CoxFit(float(beta), float("inf"), score_p, True, True, "score")
    se = 1.0 / np.sqrt(info)
    p = float(2 * stats.norm.sf(abs(beta) / se))
    return CoxFit(float(beta), float(se), p, True)
