"""Marginal association scores and thresholding of the screened feature set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ClassLabels, Continuous, Dataset, SurvivalOutcome
from .errors import EmptyScreenError, InvalidInputError, WrongOutcomeError
from .survival import cox_scores


@dataclass(frozen=True)
class ScreenScores:
    score: np.ndarray
    kind: str
    eligible: np.ndarray

    def __len__(self):
        return self.score.shape[0]


@dataclass(frozen=True)
class ScreenConfig:
    """Either an absolute threshold ``tau`` on |score| or a ``top_m`` count."""

    tau: float = None
    top_m: int = None

    def __post_init__(self):
        if (self.tau is None) == (self.top_m is None):
            raise InvalidInputError("exactly one of tau / top_m must be set")
        if self.tau is not None and self.tau < 0:
            raise InvalidInputError("tau must be non-negative")
        if self.top_m is not None and int(self.top_m) < 1:
            raise InvalidInputError("top_m must be >= 1")

    @classmethod
    def default_for(cls, n, p):
        return cls(top_m=min(p, max(20, math.ceil(n / 2))))

    @classmethod
    def from_rate(cls, n, p, d1=2.0):
        """Threshold d1 * sqrt(log p / n), the rate used for consistent screening."""
        return cls(tau=d1 * math.sqrt(math.log(p) / n))


@dataclass(frozen=True)
class FeatureSet:
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise InvalidInputError("feature indices must be distinct")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def as_array(self):
        return np.array(self.indices, dtype=int)


def _eligible(d: Dataset):
    return ~d.constant


def pearson_scores(d: Dataset) -> ScreenScores:
    if not isinstance(d.outcome, Continuous):
        raise WrongOutcomeError(f"pearson scores need a continuous outcome, got {d.kind}")
    x = d.x - d.x.mean(axis=0)
    y = d.y - d.y.mean()
    ok = _eligible(d)
    xn = np.sqrt(np.sum(x * x, axis=0))
    yn = np.sqrt(y @ y)
    score = np.zeros(d.p)
    if yn > 0:
        score[ok] = (x[:, ok].T @ y) / (xn[ok] * yn)
    return ScreenScores(np.clip(score, -1.0, 1.0), "pearson", ok)


def class_scores(d: Dataset) -> ScreenScores:
    """Pooled two-sample t statistic per feature (class 2 minus class 1)."""
    lab = d.outcome.labels
    classes = np.unique(lab)
    if classes.size != 2:
        raise WrongOutcomeError("class scores are defined for two classes")
    a, b = lab == classes[0], lab == classes[1]
    na, nb = a.sum(), b.sum()
    if na < 2 or nb < 2:
        raise InvalidInputError("each class needs at least 2 samples")
    ok = _eligible(d)
    ma, mb = d.x[a].mean(axis=0), d.x[b].mean(axis=0)
    ss = ((d.x[a] - ma) ** 2).sum(axis=0) + ((d.x[b] - mb) ** 2).sum(axis=0)
    sp = np.sqrt(ss / (na + nb - 2))
    se = sp * math.sqrt(1 / na + 1 / nb)
    score = np.zeros(d.p)
    good = ok & (se > 0)
    score[good] = (mb - ma)[good] / se[good]
    return ScreenScores(score, "class-score", good)


def survival_scores(d: Dataset) -> ScreenScores:
    ok = _eligible(d)
    score = np.zeros(d.p)
    if ok.any():
        _, _, z = cox_scores(d.x[:, ok], d.outcome)
        ok = ok.copy()
        zz = np.nan_to_num(z, nan=0.0)
        score[ok] = zz
        ok[np.flatnonzero(ok)[np.isnan(z)]] = False
    return ScreenScores(score, "cox-score", ok)


def association_scores(d: Dataset) -> ScreenScores:
    if isinstance(d.outcome, Continuous):
        return pearson_scores(d)
    if isinstance(d.outcome, SurvivalOutcome):
        return survival_scores(d)
    if isinstance(d.outcome, ClassLabels):
        return class_scores(d)
    raise WrongOutcomeError(f"unsupported outcome {type(d.outcome).__name__}")


def select(scores: ScreenScores, cfg: ScreenConfig) -> FeatureSet:
    """Screened set: |score| >= tau, or the top-m by |score| (lower index wins ties)."""
    a = np.abs(np.asarray(scores.score, dtype=float))
    elig = np.asarray(scores.eligible, dtype=bool) & np.isfinite(a)
    cand = np.flatnonzero(elig)
    if cfg.tau is not None:
        chosen = cand[a[cand] >= cfg.tau]
        chosen = chosen[np.lexsort((chosen, -a[chosen]))]
    else:
        order = cand[np.lexsort((cand, -a[cand]))]
        chosen = order[: int(cfg.top_m)]
    if chosen.size == 0:
        raise EmptyScreenError("no feature passed the screen", tau=cfg.tau, top_m=cfg.top_m)
    return FeatureSet(tuple(chosen.tolist()))
