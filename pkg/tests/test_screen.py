import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preconditioning.core import ClassLabels, Continuous, Dataset, SurvivalOutcome, standardize
from preconditioning.errors import EmptyScreenError, InvalidInputError, NoEventsError, WrongOutcomeError
from preconditioning.screen import (
    ScreenConfig,
    ScreenScores,
    association_scores,
    pearson_scores,
    select,
)
from preconditioning.simgen import gen_example1, gen_example2


def scores(values, eligible=None):
    v = np.asarray(values, dtype=float)
    return ScreenScores(v, "pearson", np.ones(v.size, bool) if eligible is None else eligible)


class TestPearson:
    def test_exact_match(self, rng):
        x = rng.normal(size=(10, 3))
        d = standardize(Dataset(x, Continuous(x[:, 1])))
        assert pearson_scores(d).score[1] == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0])
        assert pearson_scores(standardize(Dataset(x, Continuous(y)))).score[0] == pytest.approx(0, abs=1e-15)

    def test_hand_value(self):
        d = standardize(Dataset(np.array([[1.0], [2], [3], [4]]), Continuous([1.0, 3, 2, 4])))
        assert pearson_scores(d).score[0] == pytest.approx(0.8, abs=1e-12)

    def test_wrong_outcome(self):
        d = Dataset(np.eye(4), ClassLabels([1, 1, 2, 2]))
        with pytest.raises(WrongOutcomeError):
            pearson_scores(d)

    def test_constant_column_ineligible(self):
        x = np.column_stack([np.ones(5), np.arange(5.0)])
        s = pearson_scores(standardize(Dataset(x, Continuous(np.arange(5.0)))))
        assert s.eligible.tolist() == [False, True]

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.1, 50), st.floats(-20, 20), st.floats(-50, -0.1), st.integers(0, 10_000))
    def test_affine_invariance(self, a, b, c, seed):
        r = np.random.default_rng(seed)
        x = r.normal(size=(15, 3))
        y = r.normal(size=15)
        base = pearson_scores(Dataset(x, Continuous(y))).score
        moved = pearson_scores(Dataset(x * [a, 1, c] + b, Continuous(a * y + b))).score
        np.testing.assert_allclose(moved, base * [1, 1, -1], atol=1e-9)


class TestAssociation:
    def test_continuous_dispatch(self, rng):
        x = rng.normal(size=(12, 4))
        d = standardize(Dataset(x, Continuous(rng.normal(size=12))))
        np.testing.assert_array_equal(association_scores(d).score, pearson_scores(d).score)

    def test_survival_null(self):
        r = np.random.default_rng(2)
        inside = 0
        sims = 2000
        for _ in range(sims):
            t = r.exponential(size=100)
            st_ = (r.uniform(size=100) < 0.7).astype(int)
            st_[0] = 1
            d = Dataset(r.normal(size=(100, 1)), SurvivalOutcome(t, st_))
            inside += abs(association_scores(d).score[0]) < 3
        assert inside / sims >= 0.99

    def test_class_shift(self):
        r = np.random.default_rng(5)
        lab = np.repeat([1, 2], 25)
        x = r.normal(size=(50, 1)) + 3.0 * (lab == 2)[:, None]
        s = association_scores(Dataset(x, ClassLabels(lab)))
        assert s.kind == "class-score"
        assert abs(s.score[0]) > 5

    def test_all_censored(self, rng):
        d = Dataset(rng.normal(size=(5, 2)), SurvivalOutcome(np.arange(1, 6), np.zeros(5)))
        with pytest.raises(NoEventsError):
            association_scores(d)


class TestSelect:
    def test_tau_zero_keeps_eligible(self):
        s = scores([0.1, 0.0, -0.5], np.array([True, True, False]))
        assert select(s, ScreenConfig(tau=0.0)).indices == (0, 1)

    def test_top1_tie_goes_to_lower_index(self):
        assert select(scores([0.9, -0.9, 0.1]), ScreenConfig(top_m=1)).indices == (0,)

    def test_empty(self):
        with pytest.raises(EmptyScreenError):
            select(scores([0.1, 0.2]), ScreenConfig(tau=0.5))

    def test_config_needs_exactly_one_rule(self):
        with pytest.raises(InvalidInputError):
            ScreenConfig()
        with pytest.raises(InvalidInputError):
            ScreenConfig(tau=0.1, top_m=3)

    def test_default_rule(self):
        assert ScreenConfig.default_for(20, 500).top_m == 20
        assert ScreenConfig.default_for(100, 500).top_m == 50
        assert ScreenConfig.default_for(100, 30).top_m == 30

    def test_rate_rule(self):
        assert ScreenConfig.from_rate(100, 1000, 2.0).tau == pytest.approx(2 * np.sqrt(np.log(1000) / 100))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, vals, t1, t2):
        lo, hi = sorted((t1, t2))
        s = scores(vals)
        try:
            big = set(select(s, ScreenConfig(tau=lo)))
        except EmptyScreenError:
            big = set()
        try:
            small = set(select(s, ScreenConfig(tau=hi)))
        except EmptyScreenError:
            small = set()
        assert small <= big


def test_example2_x3_screened_out():
    d = standardize(gen_example2(n=20_000, seed=4))
    chosen = select(association_scores(d), ScreenConfig(tau=0.1))
    assert 0 in chosen and 1 in chosen
    assert 2 not in chosen


def test_example1_signal_scores_dominate():
    inside, outside = [], []
    for rep in range(20):
        tr = standardize(gen_example1(seed=3, replication=rep).train)
        a = np.abs(association_scores(tr).score)
        inside.append(a[:20].mean())
        outside.append(a[20:].mean())
    assert np.mean(inside) > np.mean(outside)
