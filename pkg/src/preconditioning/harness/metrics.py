"""Selection and prediction metrics."""

from __future__ import annotations

import numpy as np

from ..sparsereg import LassoPath


def count_good(entry_order, truth, milestone: int) -> int:
    """Number of true features among the first ``milestone`` entries.

    Paths shorter than ``milestone`` are counted in full.
    """
    if milestone < 1:
        raise ValueError("milestone must be >= 1")
    truth = set(int(t) for t in truth)
    return sum(1 for j in list(entry_order)[:milestone] if int(j) in truth)


def penalty_grid(mu_top, points=20, ratio=1e-3):
    if mu_top <= 0:
        return np.zeros(0)
    return np.geomspace(mu_top, mu_top * ratio, points)


def lasso_recovers(path: LassoPath, truth, points=20, ratio=1e-3) -> bool:
    """True when the support equals ``truth`` at some penalty on the grid.

    Grid points below the last knot of a truncated path are skipped.
    """
    target = set(int(t) for t in truth)
    if not target or not len(path.knots):
        return False
    floor = path.knots[-1]
    for mu in penalty_grid(path.knots[0], points, ratio):
        if mu < floor and floor > 0:
            break
        if set(np.flatnonzero(path.coef_at(mu)).tolist()) == target:
            return True
    return False


def stepwise_recovers(entry_order, truth) -> bool:
    target = set(int(t) for t in truth)
    return bool(target) and set(list(entry_order)[: len(target)]) == target


def mse(y, yhat) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.mean((y - np.asarray(yhat, dtype=float)) ** 2))


def correlation(a, b) -> float:
    a = np.asarray(a, dtype=float) - np.mean(a)
    b = np.asarray(b, dtype=float) - np.mean(b)
    den = np.sqrt((a @ a) * (b @ b))
    return float(a @ b / den) if den > 0 else float("nan")
