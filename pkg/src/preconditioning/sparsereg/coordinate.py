"""Cyclic coordinate descent for the per-n LASSO objective."""

import numpy as np

from ..errors import ConvergenceError
from .problem import LassoProblem, kkt_check


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def coord_descent(prob: LassoProblem, mu, tol=1e-10, max_iter=100000, warm_start=None):
    """Minimize (1/n)||y - X b||^2 + mu ||b||_1 one coordinate at a time.

    Stops when the largest coefficient change in a full sweep is below
    ``tol``. ``mu`` is in the problem's penalty scale.
    """
    x, y, n = prob.x, prob.y, prob.n
    lam = 0.5 * n * prob.to_per_n(mu)
    allowed = np.flatnonzero(prob.allowed())
    beta = np.zeros(prob.p) if warm_start is None else np.array(warm_start, dtype=float)
    col_sq = np.einsum("ij,ij->j", x, x)
    r = y - x @ beta
    change = np.inf
    for it in range(max_iter):
        change = 0.0
        for j in allowed:
            if col_sq[j] == 0:
                continue
            old = beta[j]
            z = x[:, j] @ r + col_sq[j] * old
            new = soft_threshold(z, lam) / col_sq[j]
            if new != old:
                r -= (new - old) * x[:, j]
                beta[j] = new
                change = max(change, abs(new - old))
        if change < tol:
            return beta
    cert = kkt_check(prob, beta, mu, tol=np.inf)
    raise ConvergenceError(f"no convergence after {max_iter} sweeps", last_change=change,
                           kkt_violation=cert.max_violation)
