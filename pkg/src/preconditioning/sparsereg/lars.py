"""Exact LASSO regularization path by least angle regression with drops."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ..errors import DegenerateStepError
from .problem import LassoProblem, certify

_TINY = 1e-12


@dataclass(frozen=True)
class LassoPath:
    """Knots of the piecewise-linear path, in decreasing per-n penalty.

    ``coefs[i]`` is the solution at ``knots[i]``; between knots the solution
    is the linear interpolation of its neighbours.
    """

    knots: np.ndarray
    coefs: np.ndarray
    entry_order: tuple
    entry_knots: tuple = ()
    kkt: tuple = field(default=(), repr=False)
    events: tuple = field(default=(), repr=False)
    penalty_scale: str = "per-n"
    n: int = 0

    @property
    def kkt_ok(self):
        return all(c.ok for c in self.kkt)

    @property
    def max_kkt_violation(self):
        return max((c.max_violation for c in self.kkt), default=0.0)

    def scaled_knots(self):
        return self.knots * self.n if self.penalty_scale == "raw" else self.knots

    def coef_at(self, mu):
        """Solution at per-n penalty ``mu`` by interpolation between knots."""
        k = self.knots
        if mu >= k[0]:
            return np.zeros(self.coefs.shape[1]) if mu > k[0] else self.coefs[0].copy()
        if mu <= k[-1]:
            return self.coefs[-1].copy()
        i = int(np.searchsorted(-k, -mu, side="right"))
        lo, hi = k[i], k[i - 1]
        w = (mu - lo) / (hi - lo)
        return w * self.coefs[i - 1] + (1 - w) * self.coefs[i]

    def active_at(self, mu):
        return np.flatnonzero(self.coef_at(mu))

    def coefs_after_entries(self, entries):
        """Penalized coefficients at the end of the segment on which the
        ``entries``-th distinct variable first became active."""
        if entries < 1 or not self.entry_knots:
            return self.coefs[0].copy()
        if entries > len(self.entry_knots):
            return self.coefs[-1].copy()
        i = min(self.entry_knots[entries - 1] + 1, len(self.knots) - 1)
        return self.coefs[i].copy()


class _Chol:
    """Cholesky factor of the active Gram matrix with incremental appends."""

    def __init__(self):
        self.L = np.zeros((0, 0))

    def append(self, g_col, g_jj):
        k = self.L.shape[0]
        if k:
            l = linalg.solve_triangular(self.L, g_col, lower=True, check_finite=False)
        else:
            l = np.zeros(0)
        d2 = g_jj - l @ l
        if d2 <= 1e-10 * g_jj:
            return False
        new = np.zeros((k + 1, k + 1))
        new[:k, :k] = self.L
        new[k, :k] = l
        new[k, k] = np.sqrt(d2)
        self.L = new
        return True

    def rebuild(self, gram):
        self.L = linalg.cholesky(gram, lower=True) if gram.size else np.zeros((0, 0))

    def solve(self, b):
        if not b.size:
            return b.copy()
        return linalg.cho_solve((self.L, True), b, check_finite=False)


def lars_path(prob: LassoProblem, mu_min=0.0, max_entries=None, kkt_tol=1e-8,
              max_steps=None) -> LassoPath:
    """Compute the LASSO path from mu_max down to ``mu_min`` (problem scale).

    ``max_entries`` stops the path one segment after the knot where that many
    distinct variables have entered. Variables that reach the boundary
    together enter one at a time, lowest index first. Every recorded knot is
    checked against the optimality conditions at ``kkt_tol``.
    """
    x, y, n = prob.x, prob.y, prob.n
    allowed = prob.allowed()
    cand = np.flatnonzero(allowed)
    lam_floor = 0.5 * n * prob.to_per_n(mu_min)
    xty = x.T @ y
    theta = np.zeros(prob.p)
    c = xty.copy()
    lam = float(np.max(np.abs(c[cand]))) if cand.size else 0.0
    lam0 = lam
    active: list[int] = []
    signs: list[float] = []
    chol = _Chol()
    entry_order: list[int] = []
    knots = [lam]
    coefs = [theta.copy()]
    grads = [c.copy()]
    events = [("start", -1)]
    entry_knots: list[int] = []
    if lam <= _TINY:
        return _finish(prob, knots, coefs, grads, entry_order, entry_knots, events, kkt_tol)

    pending = _at_boundary(c, lam, cand, active, exclude=-1)
    just_dropped = -1
    moved_since_cap = False
    max_steps = max_steps or 8 * max(prob.p, n) + 100
    for _ in range(max_steps):
        if lam <= lam_floor or lam <= _TINY * lam0:
            break
        if max_entries is not None and len(entry_order) >= max_entries and moved_since_cap:
            break
        for j in pending:
            if not _enter(j, x, active, signs, chol, c):
                if lam <= 1e-6 * lam0:
                    pending = []
                    break
                raise DegenerateStepError(
                    f"active set becomes rank deficient when variable {j} enters",
                    variable=j, knot=len(knots) - 1, mu=prob.from_per_n(2 * lam / n))
            if j not in entry_order:
                entry_order.append(j)
                entry_knots.append(len(knots) - 1)
        pending = []
        if max_entries is not None and len(entry_order) >= max_entries:
            moved_since_cap = True
        if not active:
            break

        s = np.array(signs)
        d = chol.solve(s)
        a = x.T @ (x[:, active] @ d)
        t_end = lam - lam_floor

        t_enter, j_enter = np.inf, -1
        inactive = allowed.copy()
        inactive[active] = False
        idx = np.flatnonzero(inactive)
        if idx.size:
            cj, aj = c[idx], a[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_plus = np.where(1 - aj > _TINY, (lam - cj) / (1 - aj), np.inf)
                t_minus = np.where(1 + aj > _TINY, (lam + cj) / (1 + aj), np.inf)
            if just_dropped >= 0:
                # a dropped variable sits on its old boundary at t = 0; it can
                # only come back through the opposite one
                k = int(np.searchsorted(idx, just_dropped))
                if c[just_dropped] > 0:
                    t_plus[k] = np.inf
                else:
                    t_minus[k] = np.inf
            t = np.minimum(t_plus, t_minus)
            t[t <= _TINY * lam0] = np.inf
            if idx.size and np.isfinite(t).any():
                k = int(np.argmin(t))
                t_enter, j_enter = float(t[k]), int(idx[k])

        th_a = theta[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            td = np.where(d * th_a < 0, -th_a / d, np.inf)
        td[td <= 0] = np.inf
        k_drop = int(np.argmin(td))
        t_drop = float(td[k_drop])

        just_dropped = -1
        if t_end <= min(t_enter, t_drop) * (1 + 1e-9):
            kind, j = "end", -1
            lam = lam_floor
        elif t_drop <= t_enter:
            kind, j = "drop", active[k_drop]
            lam -= t_drop
            del active[k_drop]
            del signs[k_drop]
            chol.rebuild(x[:, active].T @ x[:, active])
            just_dropped = j
        else:
            kind, j = "enter", j_enter
            lam -= t_enter

        theta = _polish(xty, theta, active, signs, chol, lam)
        c = xty - x.T @ (x @ theta)
        knots.append(lam)
        coefs.append(theta.copy())
        grads.append(c.copy())
        events.append((kind, j))
        if kind == "end":
            break
        pending = _at_boundary(c, lam, cand, active, exclude=just_dropped)
        if kind == "enter" and j not in pending:
            pending = sorted(pending + [j])

    return _finish(prob, knots, coefs, grads, entry_order, entry_knots, events, kkt_tol)


def _at_boundary(c, lam, cand, active, exclude):
    if lam <= 0:
        return []
    hit = cand[np.abs(c[cand]) >= lam * (1 - 1e-9)]
    act = set(active)
    return sorted(int(j) for j in hit if int(j) not in act and int(j) != exclude)


def _enter(j, x, active, signs, chol, c):
    g_col = x[:, active].T @ x[:, j] if active else np.zeros(0)
    if not chol.append(g_col, float(x[:, j] @ x[:, j])):
        return False
    active.append(j)
    signs.append(float(np.sign(c[j])) or 1.0)
    return True


def _polish(xty, theta, active, signs, chol, lam):
    """Re-solve the active block exactly so each knot is stationary up to rounding."""
    out = np.zeros_like(theta)
    if active:
        out[active] = chol.solve(xty[active] - lam * np.array(signs))
    return out


def _finish(prob, knots, coefs, grads, entry_order, entry_knots, events, kkt_tol):
    n = prob.n
    knots_mu = 2.0 * np.array(knots) / n
    coefs = np.array(coefs)
    allowed = prob.allowed()
    # c = X'(y - X theta) is recomputed exactly at every knot, so G = -(2/n) c
    certs = tuple(
        certify(coefs[i], -2.0 / n * grads[i], knots_mu[i], allowed, kkt_tol,
                prob.from_per_n(knots_mu[i]))
        for i in range(len(knots_mu))
    )
    return LassoPath(
        knots=knots_mu,
        coefs=coefs,
        entry_order=tuple(entry_order),
        entry_knots=tuple(entry_knots),
        kkt=certs,
        events=tuple(events),
        penalty_scale=prob.penalty_scale,
        n=n,
    )
