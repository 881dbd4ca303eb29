import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from preconditioning.core import SurvivalOutcome
from preconditioning.errors import DegenerateCovariateError, NoEventsError
from preconditioning.survival import (
    cox_fit_single,
    cox_score,
    cox_scores,
    log_partial_likelihood,
)

from oracles import fd_score, random_instance


def test_hand_example():
    o = SurvivalOutcome([1.0, 2.0, 3.0], [1, 1, 1])
    s = cox_score([3.0, 2.0, 1.0], o)
    assert s.u == pytest.approx(1.5, abs=1e-14)
    assert s.v == pytest.approx(2 / 3 + 1 / 4, abs=1e-14)
    assert s.z == pytest.approx(1.5 / np.sqrt(2 / 3 + 1 / 4))


def test_breslow_ties():
    # both t = 1 events share the full risk set
    s = cox_score([1.0, 0.0, 2.0], SurvivalOutcome([1.0, 1.0, 2.0], [1, 1, 1]))
    assert s.u == pytest.approx(-1.0, abs=1e-14)
    assert s.v == pytest.approx(4 / 3, abs=1e-14)


def test_constant_covariate():
    o = SurvivalOutcome([1.0, 2.0, 3.0, 4.0], [1, 0, 1, 1])
    u, v, z = cox_scores(np.full(4, 2.5), o)
    assert u[0] == pytest.approx(0.0, abs=1e-15) and v[0] == pytest.approx(0.0, abs=1e-15)
    assert np.isnan(z[0])
    with pytest.raises(DegenerateCovariateError):
        cox_score(np.full(4, 2.5), o)


def test_no_events():
    with pytest.raises(NoEventsError):
        cox_score([1.0, 2.0], SurvivalOutcome([1.0, 2.0], [0, 0]))


@pytest.mark.parametrize("seed", range(20))
def test_matches_numeric_derivative(seed):
    x, o = random_instance(seed)
    ref = fd_score(x, o.time.tolist(), o.status.tolist())
    assert cox_score(x, o).u == pytest.approx(ref, abs=1e-10)


def test_information_is_negative_curvature():
    x, o = random_instance(99, n=30)
    h = 1e-4
    ll = [log_partial_likelihood(b, x, o) for b in (-h, 0.0, h)]
    curv = -(ll[0] - 2 * ll[1] + ll[2]) / h**2
    assert cox_score(x, o).v == pytest.approx(curv, rel=1e-5)


def test_vectorized_matches_single():
    r = np.random.default_rng(3)
    x = r.normal(size=(25, 4))
    _, o = random_instance(3, n=25)
    u, v, z = cox_scores(x, o)
    for j in range(4):
        s = cox_score(x[:, j], o)
        assert (u[j], v[j], z[j]) == pytest.approx((s.u, s.v, s.z))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-100, 100), st.floats(0.01, 100))
def test_invariances(seed, shift, scale):
    x, o = random_instance(seed)
    base = cox_score(x, o)
    moved = cox_score(x + shift, o)
    assert moved.u == pytest.approx(base.u, abs=1e-8 * (1 + abs(shift)))
    assert cox_score(scale * x, o).z == pytest.approx(base.z, rel=1e-9, abs=1e-12)


class TestCoxFit:
    def test_sign_symmetry(self):
        x, o = random_instance(5, n=60)
        a, b = cox_fit_single(x, o), cox_fit_single(-x, o)
        assert a.beta == pytest.approx(-b.beta, rel=1e-8)
        assert a.p_value == pytest.approx(b.p_value, rel=1e-8)

    def test_score_zero_at_estimate(self):
        r = np.random.default_rng(6)
        x = r.normal(size=80)
        o = SurvivalOutcome(r.exponential(np.exp(-0.7 * x)), np.ones(80, dtype=int))
        fit = cox_fit_single(x, o)
        assert fit.converged and not fit.monotone
        h = 1e-6
        slope = (log_partial_likelihood(fit.beta + h, x, o)
                 - log_partial_likelihood(fit.beta - h, x, o)) / (2 * h)
        assert abs(slope) < 1e-5

    def test_null_pvalues_uniform(self):
        r = np.random.default_rng(7)
        ps = []
        for _ in range(500):
            x = r.normal(size=200)
            t = r.exponential(size=200)
            ps.append(cox_fit_single(x, SurvivalOutcome(t, np.ones(200, dtype=int))).p_value)
        assert stats.kstest(ps, "uniform").pvalue > 0.01

    def test_power(self):
        r = np.random.default_rng(8)
        hits = 0
        for _ in range(100):
            x = r.normal(size=200)
            t = r.exponential(np.exp(-2.0 * x))
            hits += cox_fit_single(x, SurvivalOutcome(t, np.ones(200, dtype=int))).p_value < 1e-3
        assert hits >= 95

    def test_monotone_likelihood_flagged(self):
        x = np.arange(10.0)
        o = SurvivalOutcome(10.0 - x, np.ones(10, dtype=int))
        fit = cox_fit_single(x, o)
        assert fit.monotone and fit.test == "score"
        assert 0 < fit.p_value < 1
