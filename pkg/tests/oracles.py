"""Reference computations shared by several test modules, written without the package."""

import mpmath
import numpy as np

from preconditioning.core import SurvivalOutcome

mpmath.mp.dps = 40


def breslow_loglik(beta, x, time, status):
    """Breslow log partial likelihood in extended precision, written from scratch."""
    beta = mpmath.mpf(beta)
    total = mpmath.mpf(0)
    for i in range(len(time)):
        if status[i] != 1:
            continue
        risk = [j for j in range(len(time)) if time[j] >= time[i]]
        total += beta * x[i] - mpmath.log(mpmath.fsum(mpmath.exp(beta * x[j]) for j in risk))
    return total


def fd_score(x, time, status, h=mpmath.mpf("1e-15")):
    xs = [mpmath.mpf(float(v)) for v in x]
    return float((breslow_loglik(h, xs, time, status) - breslow_loglik(-h, xs, time, status)) / (2 * h))


def random_instance(seed, n=None):
    r = np.random.default_rng(seed)
    n = int(r.integers(5, 40)) if n is None else n
    # rounded times give some tied event times
    t = np.round(r.exponential(size=n), 1) + 0.1
    status = (r.uniform(size=n) < 0.75).astype(int)
    status[0] = 1
    return r.normal(size=n), SurvivalOutcome(t, status)


def lasso_gradient(x, y, theta):
    """-(2/n) Xc'(yc - Xc theta) with columns and response centered."""
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    return -2.0 / x.shape[0] * (xc.T @ (yc - xc @ theta))


def kkt_violation(x, y, theta, mu):
    """Largest breach of the subgradient conditions at per-n penalty ``mu``."""
    g = lasso_gradient(x, y, theta)
    on = theta != 0
    v_on = np.abs(g[on] + mu * np.sign(theta[on]))
    v_off = np.maximum(np.abs(g[~on]) - mu, 0.0)
    return float(max(v_on.max(initial=0.0), v_off.max(initial=0.0)))
