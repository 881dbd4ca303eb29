"""Simulation designs and closed-form population quantities.

Covers the single-latent-factor design (example 1), the four-variable
precision-matrix design (example 2), the exchangeable block design
(example 3), the general noisy factor model and a regime in which plain
LASSO cannot recover the signal set while the pre-conditioned LASSO can.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import ClassLabels, Continuous, Dataset, SplitDataset, rng_stream
from .errors import SingularityError, SizeError, SpecError


def _ids(p):
    return tuple(f"x{j + 1}" for j in range(p))


# --- example 1: one latent factor ----------------------------------------


def gen_example1(seed=0, replication=0, n=20, p=500, n_test=200, n_signal=20,
                 beta0=0.0, beta1=2.0, alpha0=0.0, alpha1=1.0,
                 sigma0=1.0, sigma1=2.5) -> SplitDataset:
    """Y = beta0 + beta1 V + sigma1 Z and X_j = alpha0 + alpha1_j V + sigma0 e_j.

    alpha1_j = ``alpha1`` on the first ``n_signal`` columns and 0 elsewhere.
    Train and test sets are drawn independently from the same model; the
    realized latent V is attached to each part as ``latent``.
    """
    rng = rng_stream(seed, replication)
    load = np.zeros(p)
    load[:n_signal] = alpha1
    parts = []
    for m in (n, n_test):
        v = rng.standard_normal(m)
        z = rng.standard_normal(m)
        e = rng.standard_normal((m, p))
        x = alpha0 + np.outer(v, load) + sigma0 * e
        y = beta0 + beta1 * v + sigma1 * z
        parts.append(Dataset(x, Continuous(y), _ids(p), truth=tuple(range(n_signal)),
                             latent=v[:, None]))
    return SplitDataset(parts[0], parts[1], seed)


def to_classes(d: Dataset) -> Dataset:
    """Class 1 where y < 0 and class 2 otherwise."""
    lab = np.where(d.y < 0, 1, 2)
    return d.with_outcome(ClassLabels(lab))


# --- example 2: zero marginal correlation, nonzero partial correlation ---

EXAMPLE2_PRECISION = np.array([
    [2.0, 1.0, 1.0, 1.0],
    [1.0, 2.0, 0.0, 1.0],
    [1.0, 0.0, 2.0, 1.0],
    [1.0, 1.0, 1.0, 2.0],
])


def example2_population():
    """Covariance of (Y, X1, X2, X3), regression coefficients and marginal correlations."""
    cov = np.linalg.inv(EXAMPLE2_PRECISION)
    cov = (cov + cov.T) / 2
    sd = np.sqrt(np.diag(cov))
    corr = cov[0, 1:] / (sd[0] * sd[1:])
    beta = -EXAMPLE2_PRECISION[0, 1:] / EXAMPLE2_PRECISION[0, 0]
    resid_var = 1.0 / EXAMPLE2_PRECISION[0, 0]
    return {"cov": cov, "beta": beta, "corr": corr, "resid_var": resid_var}


def gen_example2(n=300, seed=0, replication=0, n_noise=297) -> Dataset:
    rng = rng_stream(seed, replication)
    cov = example2_population()["cov"]
    chol = np.linalg.cholesky(cov)
    w = rng.standard_normal((n, 4)) @ chol.T
    noise = rng.standard_normal((n, n_noise))
    x = np.column_stack([w[:, 1:], noise])
    return Dataset(x, Continuous(w[:, 0]), _ids(x.shape[1]), truth=(0, 1, 2))


# --- example 3: exchangeable block ---------------------------------------


def gen_example3(n=50, p=1000, seed=0, replication=0, n_block=40, sigma=5.0, rho=0.5) -> Dataset:
    """First ``n_block`` columns share one common factor (pairwise correlation rho)."""
    rng = rng_stream(seed, replication)
    f = rng.standard_normal(n)
    e = rng.standard_normal((n, p))
    x = e.copy()
    x[:, :n_block] = math.sqrt(rho) * f[:, None] + math.sqrt(1 - rho) * e[:, :n_block]
    beta = rng.standard_normal(n_block)
    y = x[:, :n_block] @ beta + sigma * rng.standard_normal(n)
    return Dataset(x, Continuous(y), _ids(p), truth=tuple(range(n_block)),
                   latent=f[:, None])


def example3_covariance(p=1000, n_block=40, rho=0.5):
    cov = np.eye(p)
    cov[:n_block, :n_block] = rho
    np.fill_diagonal(cov, 1.0)
    return cov


# --- general noisy factor model ------------------------------------------


@dataclass(frozen=True)
class FactorModelSpec:
    """X = sum_k sqrt(lambda_k) v_k u_k' + sigma0 E,  Y = sum_{k<=K} beta_k v_k + sigma1 Z.

    ``u`` is p x M with orthonormal columns; ``beta`` has K entries.
    """

    n: int
    p: int
    lambdas: np.ndarray
    u: np.ndarray
    beta: np.ndarray
    sigma0: float = 1.0
    sigma1: float = 1.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).ravel()
        u = np.asarray(self.u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        beta = np.asarray(self.beta, dtype=float).ravel()
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "beta", beta)
        if u.shape != (self.p, lam.size):
            raise SpecError(f"u must be p x M = {self.p} x {lam.size}, got {u.shape}")
        if not 1 <= beta.size <= lam.size:
            raise SpecError("need 1 <= K <= M")
        if np.any(lam <= 0) or np.any(np.diff(lam) > 0):
            raise SpecError("lambdas must be positive and non-increasing")
        if self.sigma0 < 0 or self.sigma1 < 0:
            raise SpecError("noise levels must be non-negative")
        gram = u.T @ u
        if not np.allclose(gram, np.eye(lam.size), atol=1e-10):
            raise SpecError("columns of u are not orthonormal")

    @property
    def m(self):
        return self.lambdas.size

    @property
    def k(self):
        return self.beta.size

    @property
    def ells(self):
        return self.lambdas + self.sigma0**2

    def covariance(self):
        """Population covariance of X."""
        return (self.u * self.lambdas) @ self.u.T + self.sigma0**2 * np.eye(self.p)

    def sets(self, tol=1e-12):
        orc = oracle(self)
        return {
            "A": tuple(np.flatnonzero(np.abs(orc.theta) > tol).tolist()),
            "B": tuple(np.flatnonzero(np.abs(orc.sigma_py) > tol).tolist()),
            "D": tuple(np.flatnonzero(np.linalg.norm(orc.w, axis=1) > tol).tolist()),
        }

    def to_dict(self):
        sets = self.sets()
        support = np.flatnonzero(np.any(self.u != 0, axis=1))
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "k": self.k,
            "lambdas": self.lambdas.tolist(),
            "beta": self.beta.tolist(),
            "sigma0": self.sigma0,
            "sigma1": self.sigma1,
            "u_support": support.tolist(),
            "u_rows": self.u[support].tolist(),
            "sets": {k: list(v) for k, v in sets.items()},
            **{k: v for k, v in self.extra.items()},
        }

    @classmethod
    def from_dict(cls, d):
        u = np.zeros((d["p"], len(d["lambdas"])))
        if d.get("u_support"):
            u[np.asarray(d["u_support"], dtype=int)] = np.asarray(d["u_rows"], dtype=float)
        return cls(d["n"], d["p"], d["lambdas"], u, d["beta"], d["sigma0"], d["sigma1"])


@dataclass(frozen=True)
class PopulationOracle:
    sigma_py: np.ndarray
    theta: np.ndarray
    sigma_eps2: float
    w: np.ndarray
    d_k: np.ndarray


def oracle(spec: FactorModelSpec) -> PopulationOracle:
    """Closed-form marginal covariances, regression coefficients and error variance."""
    k = spec.k
    lam = spec.lambdas[:k]
    ell = spec.ells[:k]
    w = spec.u[:, :k] * np.sqrt(lam)
    sigma_py = w @ spec.beta
    theta = w @ (spec.beta / ell)
    sigma_eps2 = spec.sigma1**2 + spec.sigma0**2 * float(np.sum(spec.beta**2 / ell))
    return PopulationOracle(sigma_py, theta, sigma_eps2, w, ell.copy())


def gen_factor_model(spec: FactorModelSpec, seed=0, replication=0, n=None):
    """Draw (X, Y) from the factor model; returns the dataset and the realized factors."""
    n = spec.n if n is None else n
    rng = rng_stream(seed, replication)
    v = rng.standard_normal((n, spec.m))
    e = rng.standard_normal((n, spec.p))
    z = rng.standard_normal(n)
    x = (v * np.sqrt(spec.lambdas)) @ spec.u.T + spec.sigma0 * e
    y = v[:, : spec.k] @ spec.beta + spec.sigma1 * z
    truth = spec.sets()["A"]
    return Dataset(x, Continuous(y), _ids(spec.p), truth=truth, latent=v), v


def random_factor_spec(rng, p=10, m=2, k=None, n=1000, support=None):
    """A random small spec with well separated eigenvalues (for oracle checks)."""
    k = m if k is None else k
    support = p if support is None else support
    q, _ = np.linalg.qr(rng.standard_normal((support, m)))
    u = np.zeros((p, m))
    u[:support] = q
    lambdas = np.sort(rng.uniform(1.0, 6.0, m))[::-1] + np.arange(m)[::-1]
    beta = rng.uniform(0.5, 2.0, k) * rng.choice([-1, 1], k)
    return FactorModelSpec(n, p, lambdas, u, beta, float(rng.uniform(0.5, 1.5)),
                           float(rng.uniform(0.5, 1.5)))


# --- irrepresentable condition ------------------------------------------


def irrepresentable_value(cov, a_set, sign):
    """|| Sigma_{A^c A} Sigma_AA^{-1} sign(theta_A) ||_inf for a covariance matrix."""
    cov = np.asarray(cov, dtype=float)
    a = np.asarray(sorted(a_set), dtype=int)
    rest = np.setdiff1d(np.arange(cov.shape[0]), a)
    if rest.size == 0:
        return 0.0
    saa = cov[np.ix_(a, a)]
    try:
        c, low = _cho(saa)
    except np.linalg.LinAlgError:
        raise SingularityError("Sigma_AA is singular") from None
    from scipy.linalg import cho_solve

    h = cho_solve((c, low), np.asarray(sign, dtype=float))
    return float(np.max(np.abs(cov[np.ix_(rest, a)] @ h)))


def _cho(m):
    from scipy.linalg import LinAlgError, cho_factor

    try:
        c, low = cho_factor(m, lower=True)
    except LinAlgError as exc:
        raise np.linalg.LinAlgError(str(exc)) from None
    diag = np.abs(np.diag(c))
    if diag.min() <= 1e-10 * diag.max():
        raise np.linalg.LinAlgError("near singular")
    return c, low


def irrepresentable_check(spec: FactorModelSpec, a_set=None):
    """Evaluate the irrepresentable norm from the closed-form covariance; pass iff < 1."""
    orc = oracle(spec)
    if a_set is None:
        a_set = np.flatnonzero(np.abs(orc.theta) > 1e-12)
    a_set = np.asarray(a_set, dtype=int)
    if a_set.size == 0:
        raise SpecError("signal set is empty")
    sign = np.sign(orc.theta[a_set])
    sign[sign == 0] = 1.0
    value = _irrep_sparse(spec, a_set, sign)
    return value, value < 1.0


def _irrep_sparse(spec, a_set, sign):
    # only rows that share a loading with A can be correlated with X_A
    cov_aa = (spec.u[a_set] * spec.lambdas) @ spec.u[a_set].T + spec.sigma0**2 * np.eye(a_set.size)
    try:
        c = _cho(cov_aa)
    except np.linalg.LinAlgError:
        raise SingularityError("Sigma_AA is singular") from None
    from scipy.linalg import cho_solve

    h = cho_solve(c, sign)
    rest = np.setdiff1d(np.arange(spec.p), a_set)
    cross = (spec.u[rest] * spec.lambdas) @ spec.u[a_set].T
    if rest.size == 0:
        return 0.0
    return float(np.max(np.abs(cross @ h)))


def plus_condition(spec: FactorModelSpec, a_plus):
    """max over j outside A+ of || Sigma_{A+A+}^{-1} Sigma_{A+ j} ||_1."""
    a_plus = np.asarray(a_plus, dtype=int)
    from scipy.linalg import cho_solve

    cov_pp = (spec.u[a_plus] * spec.lambdas) @ spec.u[a_plus].T + spec.sigma0**2 * np.eye(a_plus.size)
    c = _cho(cov_pp)
    rest = np.setdiff1d(np.arange(spec.p), a_plus)
    cross = (spec.u[a_plus] * spec.lambdas) @ spec.u[rest].T
    coef = cho_solve(c, cross)
    return float(np.max(np.abs(coef).sum(axis=0))) if rest.size else 0.0


# --- regime where plain LASSO cannot recover A ---------------------------


def prop5_spec(alpha=0.5, n=400, c=0.5, p_cap=20000, q_plus=6, q_minus=4,
               lambdas=(9.0, 1.0), sigma0=1.0, sigma1=1.0, theta_plus=0.5,
               minus_scale=1.0, max_cells=2.5e7) -> FactorModelSpec:
    """Two-factor spec with A = B = D split into strong (A+) and weak (A-) parts.

    Every signal feature has the same marginal covariance with Y, so all of
    them survive screening, but the two factors nearly cancel in the
    regression coefficients of A-: theta_j = minus_scale * n^{-(1-alpha)/2} / log n
    there, against ``theta_plus`` on A+. p follows log p = c n^alpha,
    capped at ``p_cap``.
    """
    if not 0 < alpha < 1:
        raise SpecError("alpha must lie in (0, 1)")
    log_p = c * n**alpha
    p = int(p_cap) if log_p >= math.log(p_cap) else int(math.exp(log_p))
    q = q_plus + q_minus
    p = max(p, q + 1)
    if n * p > max_cells:
        raise SizeError(f"n * p = {n * p} exceeds the memory budget {max_cells:g}", n=n, p=p)
    lam = np.asarray(lambdas, dtype=float)
    ell = lam + sigma0**2
    theta_minus = minus_scale * n ** (-(1 - alpha) / 2) / math.log(n)
    target = theta_minus / theta_plus
    sp, sm = math.sqrt(q_plus), math.sqrt(q_minus)
    s_dir = np.array([sp, sm])

    def rot(phi):
        return np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])

    def ratio(phi):
        r = rot(phi)
        th = r @ ((r.T @ s_dir) / ell)
        return (th[1] / sm) / (th[0] / sp) - target

    grid = np.linspace(1e-3, math.pi / 2 - 1e-3, 2000)
    vals = np.array([ratio(g) for g in grid])
    # the root where the ratio falls through the target with A+ still positive
    roots = [i for i in range(len(grid) - 1) if vals[i] > 0 >= vals[i + 1]]
    if not roots:
        raise SpecError("no rotation gives the requested coefficient ratio; widen lambdas")
    i = roots[0]
    phi = optimize.brentq(ratio, grid[i], grid[i + 1], xtol=1e-14)
    r = rot(phi)
    th = r @ ((r.T @ s_dir) / ell)
    s0 = theta_plus / (th[0] / sp)
    a = s0 * (r.T @ s_dir)
    beta = a / np.sqrt(lam)
    e_plus = np.zeros(p)
    e_plus[:q_plus] = 1 / sp
    e_minus = np.zeros(p)
    e_minus[q_plus:q] = 1 / sm
    basis = np.column_stack([e_plus, e_minus])
    u = basis @ r
    spec = FactorModelSpec(n, p, lam, u, beta, sigma0, sigma1,
                           extra={"alpha": alpha, "c": c, "a_plus": list(range(q_plus)),
                                  "a_minus": list(range(q_plus, q)),
                                  "theta_minus": theta_minus})
    return spec


def gen_prop5_regime(alpha=0.5, n=400, seed=0, replication=0, **kw):
    spec = prop5_spec(alpha=alpha, n=n, **kw)
    d, _ = gen_factor_model(spec, seed, replication)
    return d, spec


def consistency_spec(n=400, p=2000, q=10, lam=4.0, sigma0=1.0, sigma1=1.5, beta=2.0):
    """One-factor spec with ``q`` equal loadings; A = B = D = first q columns."""
    u = np.zeros((p, 1))
    u[:q, 0] = 1 / math.sqrt(q)
    return FactorModelSpec(n, p, [lam], u, [beta], sigma0, sigma1)
