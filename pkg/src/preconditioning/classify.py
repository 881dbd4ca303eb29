"""Nearest shrunken centroids and the logit pseudo-response for two-class data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import ClassLabels, Dataset, rng_stream
from .errors import InvalidClassError, InvalidInputError, SchemaError
from .sparsereg.coordinate import soft_threshold


@dataclass(frozen=True)
class NscModel:
    classes: np.ndarray
    centroids: np.ndarray
    overall_centroid: np.ndarray
    pooled_sd: np.ndarray
    s0: float
    shrinkage: float
    shrunken_centroids: np.ndarray
    priors: np.ndarray
    d: np.ndarray
    d_shrunk: np.ndarray
    feature_ids: tuple = ()

    @property
    def n_active(self):
        """Features with a nonzero shrunken deviation in some class."""
        return int(np.count_nonzero(np.any(self.d_shrunk != 0, axis=0)))


@dataclass(frozen=True)
class LogitResponse:
    values: np.ndarray
    clip: float


def _labels(d: Dataset):
    if not isinstance(d.outcome, ClassLabels):
        raise InvalidInputError(f"expected class labels, got a {d.kind} outcome")
    return d.outcome.labels


def _stats(x, lab):
    classes = np.unique(lab)
    n, p = x.shape
    counts = np.array([np.sum(lab == g) for g in classes])
    if classes.size < 2:
        raise InvalidClassError("need at least two classes", classes=classes.tolist())
    if counts.min() < 2:
        raise InvalidClassError("every class needs at least 2 samples",
                                counts=dict(zip(classes.tolist(), counts.tolist())))
    cent = np.vstack([x[lab == g].mean(axis=0) for g in classes])
    overall = x.mean(axis=0)
    resid = x - cent[np.searchsorted(classes, lab)]
    sd = np.sqrt((resid ** 2).sum(axis=0) / (n - classes.size))
    s0 = float(np.median(sd))
    mk = np.sqrt(1.0 / counts - 1.0 / n)
    return classes, counts, cent, overall, sd, s0, mk


def nsc_fit(d: Dataset, delta: float = 0.0) -> NscModel:
    """Shrink each standardized centroid deviation toward the overall centroid by ``delta``."""
    if delta < 0:
        raise InvalidInputError("delta must be >= 0")
    lab = _labels(d)
    classes, counts, cent, overall, sd, s0, mk = _stats(d.x, lab)
    denom = mk[:, None] * (sd + s0)[None, :]
    dev = (cent - overall) / denom
    shr = soft_threshold(dev, delta)
    return NscModel(
        classes=classes,
        centroids=cent,
        overall_centroid=overall,
        pooled_sd=sd,
        s0=s0,
        shrinkage=float(delta),
        shrunken_centroids=overall + denom * shr,
        priors=counts / counts.sum(),
        d=dev,
        d_shrunk=shr,
        feature_ids=d.feature_ids,
    )


def discriminant(m: NscModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = 1.0 / (m.pooled_sd + m.s0) ** 2
    out = np.empty((x.shape[0], m.classes.size))
    for k in range(m.classes.size):
        out[:, k] = ((x - m.shrunken_centroids[k]) ** 2) @ w - 2.0 * np.log(m.priors[k])
    return out


def nsc_predict_proba(m: NscModel, d: Dataset) -> np.ndarray:
    if m.feature_ids and d.feature_ids != m.feature_ids:
        raise SchemaError("feature ids do not match the fitted model")
    s = -0.5 * discriminant(m, d.x)
    return np.exp(s - logsumexp(s, axis=1, keepdims=True))


def nsc_predict(m: NscModel, d: Dataset) -> np.ndarray:
    return m.classes[np.argmax(nsc_predict_proba(m, d), axis=1)]


def logit_precondition(probs, clip: float = 1e-6) -> LogitResponse:
    """log(p / (1 - p)) for the second class, with p clipped to [clip, 1 - clip]."""
    if not 0.0 < clip < 0.5:
        raise InvalidInputError("clip must lie in (0, 0.5)")
    probs = np.asarray(probs, dtype=float)
    p2 = probs[:, 1] if probs.ndim == 2 else probs
    if probs.ndim == 2 and probs.shape[1] != 2:
        raise InvalidInputError("logit pre-conditioning needs two-class probabilities")
    p2 = np.clip(p2, clip, 1.0 - clip)
    return LogitResponse(np.log(p2) - np.log1p(-p2), clip)


def cross_entropy(probs, lab, classes, clip=1e-6):
    idx = np.searchsorted(classes, lab)
    return float(-np.mean(np.log(np.clip(probs[np.arange(lab.size), idx], clip, 1.0))))


def delta_grid(d: Dataset, size: int = 30) -> np.ndarray:
    """0 up to the smallest delta that shrinks every deviation to zero."""
    full = nsc_fit(d, 0.0)
    top = float(np.max(np.abs(full.d)))
    return np.linspace(0.0, top, size)


def choose_delta(d: Dataset, size: int = 30, criterion: str = "cv", folds: int = 5,
                 seed: int = 0) -> float:
    """Pick delta on a ``size``-point grid by cross-entropy.

    ``criterion="train"`` scores the fit on the training rows themselves;
    ``"cv"`` uses stratified ``folds``-fold held-out cross-entropy.
    """
    grid = delta_grid(d, size)
    lab = _labels(d)
    smallest = int(min(np.sum(lab == g) for g in np.unique(lab)))
    folds = min(folds, smallest)
    if criterion == "cv" and smallest < 3:
        # held-out folds would leave a class with fewer than 2 training rows
        criterion = "train"
    if criterion == "train":
        loss = [cross_entropy(nsc_predict_proba(nsc_fit(d, g), d), lab, np.unique(lab))
                for g in grid]
    elif criterion == "cv":
        loss = np.zeros(grid.size)
        rng = rng_stream(seed, 0)
        fold = np.empty(lab.size, dtype=int)
        for g in np.unique(lab):
            members = rng.permutation(np.flatnonzero(lab == g))
            fold[members] = np.arange(members.size) % folds
        classes = np.unique(lab)
        for f in range(folds):
            tr, te = np.flatnonzero(fold != f), np.flatnonzero(fold == f)
            dtr, dte = d.take_rows(tr), d.take_rows(te)
            for i, g in enumerate(grid):
                pr = nsc_predict_proba(nsc_fit(dtr, g), dte)
                loss[i] += cross_entropy(pr, lab[te], classes) * te.size
    else:
        raise InvalidInputError(f"unknown delta criterion {criterion!r}")
    return float(grid[int(np.argmin(loss))])
