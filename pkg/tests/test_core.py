import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from preconditioning.core import (
    ClassLabels,
    Continuous,
    Dataset,
    SurvivalOutcome,
    read_csv,
    rng_stream,
    split,
    standardize,
    standardize_like,
    to_csv,
)
from preconditioning.errors import InvalidInputError, SchemaError, WrongOutcomeError


def ds(x, y=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.arange(x.shape[0], dtype=float) if y is None else y
    return Dataset(x, Continuous(y))


class TestStandardize:
    def test_simple_column(self):
        out = standardize(ds([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out.x[:, 0], [-1, 0, 1], atol=1e-15)
        assert out.standardized

    def test_constant_column_is_centered_and_flagged(self):
        out = standardize(ds([5.0, 5.0, 5.0]))
        np.testing.assert_array_equal(out.x[:, 0], [0, 0, 0])
        assert out.constant.tolist() == [True]

    def test_two_columns(self):
        out = standardize(ds([[1, 10], [2, 20], [3, 30]]))
        np.testing.assert_allclose(out.x, [[-1, -1], [0, 0], [1, 1]], atol=1e-15)

    def test_outcome_untouched(self):
        y = np.array([3.0, -1.0, 4.0])
        out = standardize(ds([1.0, 2.0, 3.0], y))
        np.testing.assert_array_equal(out.y, y)

    def test_raw_values_recoverable(self, rng):
        x = rng.normal(5, 3, (10, 4))
        out = standardize(ds(x))
        np.testing.assert_allclose(out.raw_x(), x, atol=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(InvalidInputError):
            Dataset(np.ones((1, 2)), Continuous([1.0]))

    def test_like_applies_train_parameters(self, rng):
        tr = standardize(ds(rng.normal(2, 4, (20, 3))))
        te = ds(rng.normal(2, 4, (5, 3)), np.zeros(5))
        out = standardize_like(te, tr)
        np.testing.assert_allclose(out.x, (te.x - tr.center) / tr.scale)

    def test_like_schema_mismatch(self, rng):
        tr = standardize(ds(rng.normal(size=(6, 2))))
        te = Dataset(rng.normal(size=(4, 2)), Continuous(np.zeros(4)), ["a", "b"])
        with pytest.raises(SchemaError):
            standardize_like(te, tr)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (7, 3), elements=st.floats(-1e3, 1e3)))
    def test_idempotent(self, x):
        once = standardize(ds(x))
        twice = standardize(once)
        np.testing.assert_allclose(twice.x, once.x, atol=1e-12)
        sd = once.x.std(axis=0, ddof=1)
        live = ~once.constant
        np.testing.assert_allclose(sd[live], 1.0, atol=1e-9)
        np.testing.assert_allclose(once.x.mean(axis=0), 0.0, atol=1e-9)


def test_tiny_column_does_not_underflow():
    x = np.full((7, 2), 4.37e-193)
    x[0, 0] = 0.0
    x[:, 1] = np.arange(7)
    d = standardize(ds(x))
    assert np.all(np.isfinite(d.x))
    np.testing.assert_allclose(d.x.std(axis=0, ddof=1), 1.0)


def test_dataset_is_immutable(rng):
    d = ds(rng.normal(size=(4, 2)))
    with pytest.raises(ValueError):
        d.x[0, 0] = 1.0


def test_outcome_length_checked():
    with pytest.raises(InvalidInputError):
        Dataset(np.ones((3, 2)), Continuous([1.0, 2.0]))


def test_y_on_survival_is_wrong_outcome():
    d = Dataset(np.eye(3), SurvivalOutcome([1, 2, 3], [1, 0, 1]))
    with pytest.raises(WrongOutcomeError):
        d.y


@pytest.mark.parametrize("time,status", [([1, -2], [1, 1]), ([1, 2], [1, 2]), ([1], [1, 0])])
def test_survival_validation(time, status):
    with pytest.raises(InvalidInputError):
        SurvivalOutcome(time, status)


class TestSplit:
    def test_deterministic(self, rng):
        d = ds(rng.normal(size=(10, 2)))
        a, b = split(d, 0.5, 7), split(d, 0.5, 7)
        np.testing.assert_array_equal(a.train_rows, b.train_rows)
        np.testing.assert_array_equal(a.train.x, b.train.x)

    @pytest.mark.parametrize("frac", [0.0, 1.0, 1.5, -0.1])
    def test_degenerate_fraction(self, rng, frac):
        with pytest.raises(InvalidInputError):
            split(ds(rng.normal(size=(10, 2))), frac, 0)

    def test_stratified(self, rng):
        lab = np.array([1] * 6 + [2] * 6)
        d = Dataset(rng.normal(size=(12, 3)), ClassLabels(lab))
        s = split(d, 0.5, 3)
        tr = s.train.outcome.labels
        assert np.sum(tr == 1) == 3 and np.sum(tr == 2) == 3

    @settings(max_examples=30, deadline=None)
    @given(st.integers(10, 40), st.floats(0.2, 0.8), st.integers(0, 1000))
    def test_partition(self, n, frac, seed):
        x = np.arange(n * 2, dtype=float).reshape(n, 2)
        s = split(ds(x), frac, seed)
        assert set(s.train_rows).isdisjoint(s.test_rows)
        rows = np.vstack([s.train.x, s.test.x])
        assert sorted(map(tuple, rows)) == sorted(map(tuple, x))


class TestRngStream:
    def test_reproducible(self):
        assert np.array_equal(rng_stream(1, 0).random(5), rng_stream(1, 0).random(5))

    def test_replications_differ(self):
        assert not np.array_equal(rng_stream(1, 0).random(5), rng_stream(1, 1).random(5))

    def test_mean(self):
        draws = rng_stream(1, 0).standard_normal(100_000)
        assert abs(draws.mean()) < 0.02


class TestCsv:
    def test_round_trip_continuous(self, rng):
        d = Dataset(rng.normal(size=(5, 3)), Continuous(rng.normal(size=5)), ["a", "b", "c"])
        back = read_csv(to_csv(d))
        np.testing.assert_array_equal(back.x, d.x)
        np.testing.assert_array_equal(back.y, d.y)
        assert back.feature_ids == ("a", "b", "c")

    def test_round_trip_survival(self, rng, tmp_path):
        d = Dataset(rng.normal(size=(4, 2)), SurvivalOutcome([1.5, 2, 3, 4], [1, 0, 1, 1]))
        path = tmp_path / "s.csv"
        to_csv(d, path)
        back = read_csv(path, outcome="survival")
        np.testing.assert_array_equal(back.outcome.time, d.outcome.time)
        np.testing.assert_array_equal(back.outcome.status, d.outcome.status)

    def test_round_trip_standardized_writes_raw(self, rng):
        x = rng.normal(3, 2, size=(6, 2))
        d = standardize(ds(x))
        np.testing.assert_allclose(read_csv(to_csv(d)).x, x, atol=1e-12)

    def test_missing_value_rejected(self):
        with pytest.raises(InvalidInputError):
            read_csv("a,y\n1,2\n,3\n4,5\n")

    def test_missing_outcome_column(self):
        with pytest.raises(SchemaError):
            read_csv("a,b\n1,2\n3,4\n", outcome_column="y")

    def test_non_numeric(self):
        with pytest.raises(InvalidInputError):
            read_csv("a,y\n1,2\nfoo,3\n")
