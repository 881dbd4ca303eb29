"""Supervised principal components and the pre-conditioned response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .core import Dataset, SurvivalOutcome, standardize_like
from .errors import InvalidInputError, RankError, SchemaError
from .screen import FeatureSet
from .survival import cox_scores


@dataclass(frozen=True)
class SpcModel:
    """Top-k eigenpairs of the screened block S = X_B' X_B / n.

    ``eigvecs`` is |B| x k; ``center``/``scale`` are the training
    standardization parameters for the screened columns.
    """

    features: FeatureSet
    k: int
    eigvecs: np.ndarray
    eigvals: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    feature_ids: tuple
    n_train: int

    def loadings(self, p):
        """Eigenvectors zero-padded to length p (columns outside B get 0)."""
        full = np.zeros((p, self.k))
        full[self.features.as_array()] = self.eigvecs
        return full


@dataclass(frozen=True)
class PreconditionedResponse:
    y_tilde: np.ndarray
    factors: np.ndarray
    regression_coefs: np.ndarray


def _fix_signs(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def top_eigenpairs(xb, k):
    """Leading eigenpairs of xb' xb / n, via the smaller of the two Gram sides."""
    n, q = xb.shape
    if q <= n:
        s = xb.T @ xb / n
        vals, vecs = linalg.eigh(s, subset_by_index=[q - k, q - 1])
        vals, vecs = vals[::-1], vecs[:, ::-1]
    else:
        g = xb @ xb.T / n
        vals, a = linalg.eigh(g, subset_by_index=[n - k, n - 1])
        vals, a = vals[::-1], a[:, ::-1]
        if np.any(vals <= 0):
            raise RankError("requested more components than the screened block supports", k=k)
        vecs = xb.T @ a / np.sqrt(n * vals)
        # one re-orthonormalization pass absorbs rounding from the back-transform
        vecs, _ = np.linalg.qr(vecs)
        vecs = vecs * np.sign(np.sum(vecs * (xb.T @ a), axis=0))
        vals = np.sum((xb @ vecs) ** 2, axis=0) / n
    return vals, _fix_signs(vecs)


def fit_spc(d: Dataset, features: FeatureSet, k: int = 1) -> SpcModel:
    if not d.standardized:
        raise InvalidInputError("fit_spc expects a standardized dataset")
    cols = features.as_array()
    if cols.size == 0:
        raise InvalidInputError("empty feature set")
    if cols.min() < 0 or cols.max() >= d.p:
        raise SchemaError("feature index out of range")
    kmax = min(d.n - 1, cols.size)
    if not 1 <= k <= kmax:
        raise RankError(f"k={k} outside 1..{kmax}", k=k, max_k=kmax)
    xb = d.x[:, cols]
    vals, vecs = top_eigenpairs(xb, k)
    tol = max(1e-12, 1e-10 * vals[0]) if vals.size else 0.0
    if vals.size < k or vals[-1] <= tol:
        raise RankError(f"screened block has rank below k={k}", eigvals=vals)
    return SpcModel(
        features=features,
        k=int(k),
        eigvecs=vecs,
        eigvals=vals,
        center=d.center[cols],
        scale=d.scale[cols],
        feature_ids=tuple(d.feature_ids[j] for j in cols),
        n_train=d.n,
    )


def _screened_block(m: SpcModel, d: Dataset):
    cols = m.features.as_array()
    if d.p <= cols.max():
        raise SchemaError("dataset is missing screened columns")
    ids = tuple(d.feature_ids[j] for j in cols)
    if ids != m.feature_ids:
        raise SchemaError("feature ids do not match the fitted model")
    raw = d.raw_x()[:, cols]
    return (raw - m.center) / m.scale


def latent_scores(m: SpcModel, d: Dataset) -> np.ndarray:
    """Factor scores X_B u_k / sqrt(l_k), one column per component."""
    xb = _screened_block(m, d)
    return xb @ m.eigvecs / np.sqrt(m.eigvals)


def project(factors, y):
    coefs, *_ = np.linalg.lstsq(factors, y, rcond=None)
    return factors @ coefs, coefs


def precondition(m: SpcModel, d: Dataset, y=None) -> PreconditionedResponse:
    """Least-squares projection of y onto the span of the factor scores.

    ``y`` defaults to the continuous outcome of ``d``; survival and class
    pipelines pass their pseudo-response explicitly.
    """
    v = latent_scores(m, d)
    y = d.y if y is None else np.asarray(y, dtype=float)
    yt, coefs = project(v, y)
    return PreconditionedResponse(yt, v, coefs)


def predict(m: SpcModel, coefs, d_new: Dataset) -> np.ndarray:
    return latent_scores(m, d_new) @ np.asarray(coefs, dtype=float)


def survival_pseudo_response(m: SpcModel, d: Dataset):
    """Pre-conditioned response for a survival outcome.

    No continuous y exists to project, so the factor scores themselves are
    combined, each weighted by its own Cox score (for k = 1 this is the first
    component oriented toward higher risk).
    """
    if not isinstance(d.outcome, SurvivalOutcome):
        raise InvalidInputError("survival_pseudo_response needs a survival outcome")
    v = latent_scores(m, d)
    _, _, z = cox_scores(v, d.outcome)
    w = np.nan_to_num(z, nan=0.0)
    if m.k == 1:
        w = np.sign(w) + (w == 0)
    return PreconditionedResponse(v @ w, v, w)


def standardized_test(test: Dataset, train: Dataset) -> Dataset:
    return standardize_like(test, train)
