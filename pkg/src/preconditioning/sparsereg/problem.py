"""LASSO problem definition, optimality certificates and OLS refits.

The penalty is normalized per sample: the objective is
``(1/n) ||y - X b||^2 + mu ||b||_1``. The summed-squares form used by
``penalty_scale="raw"`` corresponds to ``mu_raw = n * mu``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import InvalidInputError, RankError


@dataclass(frozen=True)
class LassoProblem:
    x: np.ndarray
    y: np.ndarray
    penalty_scale: str = "per-n"
    restriction: tuple = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise InvalidInputError("x must be n x p with len(y) == n")
        if x.shape[0] < 2:
            raise InvalidInputError("need at least 2 rows")
        if self.penalty_scale not in ("per-n", "raw"):
            raise InvalidInputError(f"unknown penalty_scale {self.penalty_scale!r}")
        # an unpenalized intercept is handled by centering both sides
        x = x - x.mean(axis=0)
        y = y - y.mean()
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.restriction is not None:
            r = tuple(sorted(int(j) for j in self.restriction))
            if r and (r[0] < 0 or r[-1] >= x.shape[1]):
                raise InvalidInputError("restriction index out of range")
            object.__setattr__(self, "restriction", r)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def to_per_n(self, mu):
        return mu / self.n if self.penalty_scale == "raw" else mu

    def from_per_n(self, mu):
        return mu * self.n if self.penalty_scale == "raw" else mu

    def allowed(self):
        mask = np.ones(self.p, dtype=bool)
        if self.restriction is not None:
            mask[:] = False
            mask[list(self.restriction)] = True
        return mask

    def objective(self, theta, mu):
        """Objective value at ``theta`` for a per-n penalty ``mu``."""
        r = self.y - self.x @ theta
        return float(r @ r / self.n + mu * np.abs(theta).sum())


def gradient(prob: LassoProblem, theta):
    """G_j(theta) = -(2/n) <y - X theta, X_j>."""
    return -2.0 / prob.n * (prob.x.T @ (prob.y - prob.x @ theta))


def mu_max(prob: LassoProblem) -> float:
    """Smallest per-n penalty at which theta = 0 is optimal (in the problem's scale)."""
    g = np.abs(gradient(prob, np.zeros(prob.p)))[prob.allowed()]
    return prob.from_per_n(float(g.max()) if g.size else 0.0)


@dataclass(frozen=True)
class KktCertificate:
    ok: bool
    max_violation: float
    index: int
    mu: float

    def __bool__(self):
        return self.ok


def kkt_check(prob: LassoProblem, theta, mu, tol=1e-8) -> KktCertificate:
    """Check the subgradient optimality conditions at ``theta``.

    Active coordinates need G_j = -sign(theta_j) mu; inactive ones need
    |G_j| <= mu. Coordinates outside a restriction must be exactly zero and
    are otherwise unconstrained. ``mu`` is in the problem's penalty scale.
    """
    theta = np.asarray(theta, dtype=float)
    return certify(theta, gradient(prob, theta), prob.to_per_n(mu), prob.allowed(), tol, mu)


def certify(theta, g, m, allowed, tol, mu_reported=None) -> KktCertificate:
    """Certificate from a precomputed gradient ``g`` at per-n penalty ``m``."""
    active = theta != 0
    viol = np.zeros(theta.shape[0])
    viol[active] = np.abs(g[active] + np.sign(theta[active]) * m)
    off = ~active
    viol[off] = np.maximum(np.abs(g[off]) - m, 0.0)
    viol[~allowed] = np.where(active[~allowed], np.inf, 0.0)
    j = int(np.argmax(viol)) if viol.size else -1
    worst = float(viol[j]) if viol.size else 0.0
    return KktCertificate(worst <= tol, worst, j, float(m if mu_reported is None else mu_reported))


def ols_refit(x, y, support) -> np.ndarray:
    """Least squares on ``support`` (with intercept via centering), zeros elsewhere."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    p = x.shape[1]
    beta = np.zeros(p)
    s = np.array(sorted(int(j) for j in support), dtype=int)
    if s.size == 0:
        return beta
    xs = x[:, s] - x[:, s].mean(axis=0)
    yc = y - y.mean()
    if s.size > xs.shape[0] - 1:
        raise RankError("support larger than the residual degrees of freedom", support=s)
    q, r, piv = linalg.qr(xs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= 1e-10 * max(diag.max(), 1e-300):
        bad = s[piv[diag <= 1e-10 * max(diag.max(), 1e-300)]]
        raise RankError("support columns are collinear", collinear=bad)
    coef = linalg.solve_triangular(r, q.T @ yc)
    beta[s[piv]] = coef
    return beta


def intercept(x, y, beta):
    return float(np.mean(y) - np.mean(x, axis=0) @ beta)
