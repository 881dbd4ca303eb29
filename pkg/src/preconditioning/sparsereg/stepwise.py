"""Greedy forward stepwise least squares."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepwisePath:
    entry_order: tuple
    rss: np.ndarray
    coefs: np.ndarray
    stop_reason: str = "max-steps"

    def coefs_after_entries(self, entries):
        if entries < 1 or not self.entry_order:
            return np.zeros(self.coefs.shape[1]) if self.coefs.size else np.zeros(0)
        return self.coefs[min(entries, len(self.entry_order)) - 1].copy()


def forward_stepwise(x, y, max_steps=None, rank_tol=1e-10):
    """Enter, one at a time, the column that most reduces the residual sum of squares.

    Candidates are orthogonalized against the active set, so each step is an
    exact least-squares refit. Ties go to the lower column index. ``rss[0]``
    is the intercept-only RSS.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = x.shape
    cap = min(n - 1, p)
    max_steps = cap if max_steps is None else min(int(max_steps), cap)
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    z = xc.copy()  # candidates with the active directions projected out
    norms0 = np.einsum("ij,ij->j", xc, xc)
    r = yc.copy()
    rss = [float(r @ r)]
    order, coefs = [], []
    available = np.ones(p, dtype=bool)
    reason = "max-steps"
    for _ in range(max_steps):
        zn = np.einsum("ij,ij->j", z, z)
        ok = available & (zn > rank_tol * np.maximum(norms0, 1e-300))
        if not ok.any():
            reason = "rank"
            break
        gain = np.full(p, -np.inf)
        gain[ok] = (z[:, ok].T @ r) ** 2 / zn[ok]
        j = int(np.argmax(gain))
        q = z[:, j] / np.sqrt(zn[j])
        r = r - (q @ r) * q
        z = z - np.outer(q, q @ z)
        available[j] = False
        order.append(j)
        rss.append(float(r @ r))
        beta = np.zeros(p)
        sol, *_ = np.linalg.lstsq(xc[:, order], yc, rcond=None)
        beta[order] = sol
        coefs.append(beta)
        if rss[-1] <= 1e-24 * rss[0]:
            reason = "perfect-fit"
            break
    coefs = np.array(coefs) if coefs else np.zeros((0, p))
    return StepwisePath(tuple(order), np.array(rss), coefs, reason)
