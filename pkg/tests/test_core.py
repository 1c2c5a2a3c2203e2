import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesfpr import core
from bayesfpr.core import ClassPrior, SoftDataset
from bayesfpr.errors import DomainError, InvalidModelError
from bayesfpr.synthetic import FiniteModel

labels = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=60)
priors = st.floats(0.01, 0.99)


def soft(ys, x=None):
    ys = np.asarray(ys, dtype=float)
    return SoftDataset(np.zeros(len(ys), dtype=np.int64) if x is None else x, ys)


@pytest.mark.parametrize("y, want", [(0.5, 1), (0.0, 0), (0.7, 1), (1.0, 1), (0.4999999, 0)])
def test_bayes_decide(y, want):
    assert core.bayes_decide(y) == want


@pytest.mark.parametrize("y", [-0.01, 1.01, float("nan")])
def test_bayes_decide_rejects_outside_unit_interval(y):
    with pytest.raises(DomainError):
        core.bayes_decide(y)


def test_soft_dataset_validation():
    with pytest.raises(DomainError):
        soft([0.2, 1.2])
    with pytest.raises(DomainError):
        soft([])
    with pytest.raises(DomainError):
        SoftDataset(np.array([0, 1]), np.array([0.3]))
    d = soft([0.2, 0.9])
    assert not d.y.flags.writeable
    assert d.n == len(d) == 2


@pytest.mark.parametrize("p0", [0.0, 1.0, -0.3, 1.5])
def test_prior_bounds(p0):
    with pytest.raises(InvalidModelError):
        ClassPrior(p0)


def test_known_prior_examples():
    assert core.fpr_known_prior(soft([0.7, 0.2]), ClassPrior(0.5)).value == pytest.approx(0.3, abs=1e-15)
    assert core.fpr_known_prior(soft([0.1, 0.2, 0.49]), ClassPrior(0.3)).value == 0.0
    assert core.fpr_known_prior(soft([1.0, 1.0]), ClassPrior(0.7)).value == 0.0


def test_prior_hat_examples():
    assert core.prior_hat(soft([0.7, 0.2, 0.4])) == pytest.approx(2 / 3)
    assert core.prior_hat(soft([0.5, 0.9])) == 0.0
    assert core.prior_hat(soft([0.1, 0.3])) == 1.0


def test_prior_free_examples():
    r = core.fpr_prior_free(soft([0.7, 0.2, 0.4]), 1e-12)
    assert r.value == pytest.approx(0.15, abs=1e-15)
    assert not r.denominator_clamped
    assert core.fpr_prior_free(soft([0.1, 0.3])).value == 0.0
    r = core.fpr_prior_free(soft([1.0, 1.0]))
    assert r.value == 0.0 and r.denominator_clamped


def test_prior_free_can_exceed_one_when_clamped():
    r = core.fpr_prior_free(soft([0.6, 0.6]), epsilon=0.1)
    assert r.denominator_clamped
    assert r.value == pytest.approx(8.0)


def test_prior_free_saturates_instead_of_overflowing():
    r = core.fpr_prior_free(soft(np.full(2000, 0.6)))
    assert r.denominator_clamped
    assert r.value == sys.float_info.max


def test_epsilon_resolution():
    assert core.resolve_epsilon("auto", 3) == math.exp(-3)
    assert core.resolve_epsilon("auto", 10**6) == sys.float_info.min
    for bad in (0.0, -1.0, float("inf"), "tiny"):
        with pytest.raises(DomainError):
            core.resolve_epsilon(bad, 5)


def test_fnr_examples():
    a = core.fnr_known_prior(soft([0.7, 0.2]), ClassPrior(0.5))
    b = core.fpr_known_prior(soft([0.3, 0.8]), ClassPrior(0.5))
    # both sides reduce to 0.2 / (2 * 0.5)
    assert a.value == b.value == pytest.approx(0.2)
    assert core.fnr_known_prior(soft([0.4]), ClassPrior(0.5)).value == pytest.approx(0.8)
    assert core.fnr_known_prior(soft([0.0, 0.0]), ClassPrior(0.5)).value == 0.0
    assert a.metadata["rate"] == "fnr"


def test_exact_fpr_examples():
    m = FiniteModel([0.5, 0.5], [0.8, 0.3])
    assert core.exact_fpr(m) == pytest.approx(0.1 / 0.45, abs=1e-15)
    assert core.exact_fpr(FiniteModel([0.5, 0.5], [0.1, 0.3])) == 0.0
    assert core.exact_fpr(FiniteModel([0.5, 0.5], [0.6, 0.9])) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidModelError):
        FiniteModel([0.5, 0.5], [1.0, 1.0])


@given(labels, priors)
def test_known_prior_range(ys, p0):
    v = core.fpr_known_prior(soft(ys), ClassPrior(p0)).value
    assert 0.0 <= v <= 1.0 / (2.0 * p0) + 1e-12


@given(labels, st.randoms(use_true_random=False))
def test_prior_free_permutation_invariant(ys, rnd):
    shuffled = list(ys)
    rnd.shuffle(shuffled)
    a = core.fpr_prior_free(soft(ys)).value
    b = core.fpr_prior_free(soft(shuffled)).value
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


@given(labels, st.floats(1e-300, 0.999))
def test_prior_free_independent_of_small_epsilon(ys, eps):
    ys = list(ys) + [0.1]
    d = soft(ys)
    r = core.fpr_prior_free(d, eps)
    y = np.asarray(ys)
    assert r.value == float(np.sum(core.false_positive_mass(y))) / float(np.count_nonzero(y < 0.5))
    assert not r.denominator_clamped


@settings(max_examples=200)
@given(labels, priors)
def test_fnr_is_fpr_on_flipped_labels(ys, p1):
    d = soft(ys)
    flipped = soft(1.0 - np.asarray(ys))
    assert core.fnr_known_prior(d, ClassPrior(1 - p1)).value == core.fpr_known_prior(flipped, ClassPrior(1 - p1).flipped()).value
    assert core.fnr_prior_free(d).value == core.fpr_prior_free(flipped).value


def test_result_to_dict():
    r = core.fpr_prior_free(soft([0.7, 0.2]))
    d = r.to_dict()
    assert d["estimator"] == "psi2" and d["n_used"] == 2 and d["denominator_clamped"] is False
