"""Data model, standardization, seeded randomness and train/test splits."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError, SchemaError, WrongOutcomeError


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Continuous:
    y: np.ndarray
    kind = "continuous"

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen(self.y).ravel())

    def __len__(self):
        return self.y.shape[0]

    def take(self, idx):
        return Continuous(self.y[idx])


@dataclass(frozen=True)
class SurvivalOutcome:
    """Right-censored survival times; ``status`` is 1 for an event, 0 for censoring."""

    time: np.ndarray
    status: np.ndarray
    kind = "survival"

    def __post_init__(self):
        t = _frozen(self.time).ravel()
        s = _frozen(self.status, dtype=int).ravel()
        if t.shape != s.shape:
            raise InvalidInputError("time and status lengths differ")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise InvalidInputError("survival times must be finite and positive")
        if not np.all(np.isin(s, (0, 1))):
            raise InvalidInputError("status must be 0 or 1")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "status", s)

    def __len__(self):
        return self.time.shape[0]

    def take(self, idx):
        return SurvivalOutcome(self.time[idx], self.status[idx])


@dataclass(frozen=True)
class ClassLabels:
    """Integer class labels in 1..G."""

    labels: np.ndarray
    kind = "class"

    def __post_init__(self):
        lab = _frozen(self.labels, dtype=int).ravel()
        if lab.size and lab.min() < 1:
            raise InvalidInputError("class labels must be integers >= 1")
        object.__setattr__(self, "labels", lab)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def classes(self):
        return np.unique(self.labels)

    def take(self, idx):
        return ClassLabels(self.labels[idx])


Outcome = Union[Continuous, SurvivalOutcome, ClassLabels]


@dataclass(frozen=True)
class Dataset:
    """An n x p predictor matrix together with one outcome channel.

    ``center``/``scale`` hold the parameters that produced ``x`` when
    ``standardized`` is set, so raw values can always be recovered.
    ``truth`` is an optional set of known signal columns and ``latent`` the
    realized latent factors (simulations only).
    """

    x: np.ndarray
    outcome: Outcome
    feature_ids: tuple = None
    standardized: bool = False
    center: np.ndarray = None
    scale: np.ndarray = None
    constant: np.ndarray = None
    truth: tuple = None
    latent: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        x = _frozen(self.x)
        if x.ndim == 1:
            x = _frozen(x.reshape(-1, 1))
        if x.ndim != 2:
            raise InvalidInputError("x must be a 2-d matrix")
        n, p = x.shape
        if n < 2 or p < 1:
            raise InvalidInputError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("x contains missing or non-finite values")
        if len(self.outcome) != n:
            raise InvalidInputError(f"outcome length {len(self.outcome)} != n={n}")
        ids = self.feature_ids
        ids = tuple(f"x{j + 1}" for j in range(p)) if ids is None else tuple(str(i) for i in ids)
        if len(ids) != p:
            raise SchemaError("feature_ids length does not match column count")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "feature_ids", ids)
        for name in ("center", "scale"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _frozen(v))
        const = self.constant
        if const is None:
            const = np.ptp(x, axis=0) == 0
        object.__setattr__(self, "constant", _frozen(const, dtype=bool))
        if self.truth is not None:
            object.__setattr__(self, "truth", tuple(int(j) for j in self.truth))
        if self.latent is not None:
            object.__setattr__(self, "latent", _frozen(self.latent))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def kind(self):
        return self.outcome.kind

    @property
    def y(self):
        if not isinstance(self.outcome, Continuous):
            raise WrongOutcomeError(f"expected a continuous outcome, got {self.kind}")
        return self.outcome.y

    def raw_x(self):
        if not self.standardized:
            return self.x
        return self.x * self.scale + self.center

    def with_outcome(self, outcome):
        return replace(self, outcome=outcome)

    def with_y(self, y):
        return replace(self, outcome=Continuous(y))

    def take_rows(self, idx):
        idx = np.asarray(idx)
        latent = None if self.latent is None else self.latent[idx]
        return replace(self, x=self.x[idx], outcome=self.outcome.take(idx), constant=None,
                       latent=latent)

    def take_columns(self, cols):
        cols = np.asarray(cols, dtype=int)
        keep = dict(
            x=self.x[:, cols],
            feature_ids=tuple(self.feature_ids[j] for j in cols),
            constant=self.constant[cols],
            truth=None,
        )
        if self.standardized:
            keep.update(center=self.center[cols], scale=self.scale[cols])
        if self.truth is not None:
            pos = {c: i for i, c in enumerate(cols.tolist())}
            keep["truth"] = tuple(pos[t] for t in self.truth if t in pos)
        return replace(self, **keep)


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    test: Dataset
    seed: int = 0
    train_rows: np.ndarray = field(default=None, repr=False)
    test_rows: np.ndarray = field(default=None, repr=False)


def standardize(d: Dataset) -> Dataset:
    """Center every column and scale it to unit sample sd (divisor n - 1).

    Constant columns are centered only and flagged in ``constant``.
    Standardizing an already standardized dataset is a no-op up to rounding.
    """
    if d.n < 2:
        raise InvalidInputError("standardize needs at least 2 rows")
    raw = d.raw_x()
    center = raw.mean(axis=0)
    spread = np.ptp(raw, axis=0)
    constant = spread == 0
    # divide by the range first so tiny columns do not underflow in the variance
    unit = np.where(constant, 1.0, spread)
    sd = unit * ((raw - center) / unit).std(axis=0, ddof=1)
    scale = np.where(constant, 1.0, sd)
    return _apply(d, raw, center, scale, constant)


def standardize_like(d: Dataset, ref: Dataset) -> Dataset:
    """Standardize ``d`` with the center/scale captured on ``ref``."""
    if not ref.standardized:
        raise InvalidInputError("reference dataset is not standardized")
    if d.feature_ids != ref.feature_ids:
        raise SchemaError("feature columns differ from the reference dataset")
    return _apply(d, d.raw_x(), ref.center, ref.scale, ref.constant)


def _apply(d, raw, center, scale, constant):
    x = (raw - center) / scale
    x[:, constant] = raw[:, constant] - center[constant]
    return replace(d, x=x, standardized=True, center=center, scale=scale, constant=constant)


def rng_stream(seed: int, replication: int = 0) -> np.random.Generator:
    """Independent reproducible generator for one (seed, replication) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replication),))
    return np.random.Generator(np.random.PCG64(ss))


def split(d: Dataset, train_fraction: float, seed: int) -> SplitDataset:
    if not 0.0 < train_fraction < 1.0:
        raise InvalidInputError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = rng_stream(seed, 0)
    n = d.n
    if isinstance(d.outcome, ClassLabels):
        train = []
        for g in d.outcome.classes:
            members = np.flatnonzero(d.outcome.labels == g)
            k = int(round(train_fraction * members.size))
            train.extend(rng.permutation(members)[:k].tolist())
        train = np.sort(np.array(train, dtype=int))
    else:
        k = int(round(train_fraction * n))
        train = np.sort(rng.permutation(n)[:k])
    test = np.setdiff1d(np.arange(n), train)
    if train.size < 2:
        raise InvalidInputError("train split has fewer than 2 rows")
    if test.size < 1:
        raise InvalidInputError("test split is empty")
    return SplitDataset(d.take_rows(train), d.take_rows(test), seed, train, test)


# --- CSV ---------------------------------------------------------------

SURVIVAL_COLUMNS = ("time", "status")


def read_csv(path_or_text, outcome="continuous", outcome_column="y") -> Dataset:
    """Read a dataset: header of feature ids plus outcome column(s).

    Survival files carry ``time`` and ``status`` columns. Missing values are
    rejected rather than imputed.
    """
    if isinstance(path_or_text, Path) or (
        isinstance(path_or_text, str) and "\n" not in path_or_text and Path(path_or_text).exists()
    ):
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if len(rows) < 3:
        raise InvalidInputError("CSV needs a header and at least 2 rows")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise InvalidInputError(f"row {i + 1} has {len(r)} fields, header has {len(header)}")
        if any(v.strip() == "" or v.strip().lower() in ("na", "nan") for v in r):
            raise InvalidInputError(f"missing value in row {i + 1}")
    try:
        values = np.array([[float(v) for v in r] for r in body])
    except ValueError as exc:
        raise InvalidInputError(f"non-numeric value: {exc}") from None
    out_cols = SURVIVAL_COLUMNS if outcome == "survival" else (outcome_column,)
    for c in out_cols:
        if c not in header:
            raise SchemaError(f"outcome column {c!r} not in header")
    feat = [j for j, h in enumerate(header) if h not in out_cols]
    x = values[:, feat]
    ids = [header[j] for j in feat]
    if outcome == "survival":
        oc = SurvivalOutcome(values[:, header.index("time")], values[:, header.index("status")])
    elif outcome == "class":
        col = values[:, header.index(outcome_column)]
        if not np.allclose(col, np.round(col)):
            raise InvalidInputError("class labels must be integers")
        oc = ClassLabels(np.round(col).astype(int))
    elif outcome == "continuous":
        oc = Continuous(values[:, header.index(outcome_column)])
    else:
        raise InvalidInputError(f"unknown outcome kind {outcome!r}")
    return Dataset(x, oc, ids)


def to_csv(d: Dataset, path=None, outcome_column="y") -> str:
    """Write raw (unstandardized) values; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    oc = d.outcome
    if isinstance(oc, SurvivalOutcome):
        cols = list(SURVIVAL_COLUMNS)
        extra = np.column_stack([oc.time, oc.status])
    elif isinstance(oc, ClassLabels):
        cols = [outcome_column]
        extra = oc.labels[:, None]
    else:
        cols = [outcome_column]
        extra = oc.y[:, None]
    w.writerow(list(d.feature_ids) + cols)
    raw = d.raw_x()
    for i in range(d.n):
        w.writerow([repr(float(v)) for v in raw[i]] + [_fmt(v) for v in extra[i]])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def as_dataset(x, y=None, outcome: Outcome = None, feature_ids: Sequence = None) -> Dataset:
    if outcome is None:
        outcome = Continuous(y)
    return Dataset(np.asarray(x, dtype=float), outcome, feature_ids)
