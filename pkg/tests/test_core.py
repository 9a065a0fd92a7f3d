import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aiflearn.core import (FULL_BATCH, FRESH_PARTITION, H0, H1, Hypothesis, Panel, PsiHat,
                           RandomizedClassifier, derive_hyperparams, evaluate, formula_T,
                           horizon_eta)


def test_hyperparams_with_T_override():
    hp = derive_hyperparams(0.1, 0.2, 200, 50, {"T": 1000})
    assert hp.B == pytest.approx(14.0, abs=1e-12)
    assert hp.eta == pytest.approx(0.2 / (4 * 1.44 * 14), rel=1e-12)
    assert hp.eta == pytest.approx(2.480e-3, abs=1e-6)
    assert hp.T == 1000
    assert hp.batch_mode == FULL_BATCH
    assert hp.m0 == 50


def test_hyperparams_plain_formula():
    hp = derive_hyperparams(0.5, 1.0, 1, 1)
    assert hp.B == 6.0
    assert hp.eta == pytest.approx(1 / 96, rel=1e-15)
    assert hp.T == math.ceil(16 * 36 * 4 * math.log(3))


def test_hyperparams_fall_back_to_full_batch():
    hp = derive_hyperparams(0.05, 0.1, 200, 50)
    assert hp.T > 50
    assert hp.batch_mode == FULL_BATCH and hp.m0 == 50


def test_fresh_partition_when_tasks_suffice():
    hp = derive_hyperparams(0.5, 1.0, 1, 10_000, {"T": 100})
    assert hp.batch_mode == FRESH_PARTITION and hp.m0 == 100


@pytest.mark.parametrize("alpha,nu", [(0.0, 0.2), (1.0, 0.2), (-0.1, 0.2), (0.1, 0.0), (0.1, 1.5)])
def test_hyperparams_reject_bad_inputs(alpha, nu):
    with pytest.raises(ValueError):
        derive_hyperparams(alpha, nu, 10, 10)


def test_hyperparams_reject_unknown_override():
    with pytest.raises(ValueError):
        derive_hyperparams(0.1, 0.2, 10, 10, {"lr": 1.0})


@given(st.floats(0.01, 0.9), st.floats(0.01, 1.0), st.integers(1, 500))
def test_horizon_eta_matches_default_at_formula_T(alpha, nu, n):
    hp = derive_hyperparams(alpha, nu, n, 1)
    # equal up to the ceiling in T
    assert horizon_eta(alpha, n, hp.T) == pytest.approx(hp.eta, rel=1e-3)
    assert hp.T == formula_T(alpha, nu, n)


def test_horizon_override():
    hp = derive_hyperparams(0.2, 0.2, 3, 2, {"T": 5000, "eta": "horizon"})
    assert hp.eta == pytest.approx(math.sqrt(math.log(7) / 5000) / 1.4, rel=1e-15)


def test_evaluate_examples():
    assert evaluate(H1, [3.0, -2.0]) == 1
    assert evaluate(H0, [3.0, -2.0]) == 0
    assert evaluate(Hypothesis.linear([0.0, 0.0], 0.0), [5.0, 1.0]) == 0
    assert evaluate(Hypothesis.linear([1.0, 0.0, 0.0], -0.5), [1.0, 0.0, 0.0]) == 1


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(Hypothesis.linear([1.0, 0.0], 0.0), [1.0, 2.0, 3.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
       st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2))
def test_evaluate_is_deterministic(coef, x):
    h = Hypothesis(coefficients=tuple(coef), kind="linear_threshold")
    assert evaluate(h, x) == evaluate(h, x)
    assert evaluate(h, x) == int(np.dot(coef[:2], x) + coef[2] > 0)


def test_hypothesis_round_trip():
    h = Hypothesis.linear([0.25, -1.0], 3.5)
    assert Hypothesis.from_dict(h.to_dict()) == h
    assert Hypothesis.from_dict(H1.to_dict()) == H1
    with pytest.raises(ValueError):
        Hypothesis("constant_zero", (1.0, 2.0))


@given(st.integers(1, 40))
def test_uniform_mixture_weights_sum_to_one(k):
    p = RandomizedClassifier.uniform([H0] * k)
    assert abs(math.fsum(p.weights) - 1.0) <= 1e-12


def test_mixture_validation():
    with pytest.raises(ValueError):
        RandomizedClassifier((H0, H1), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        RandomizedClassifier((), np.array([]))
    p = RandomizedClassifier((H0, H1), np.array([0.25, 0.75]))
    assert np.allclose(p.predict_proba(np.zeros((3, 2))), 0.75)


def test_panel_validation():
    with pytest.raises(ValueError):
        Panel(np.zeros((2, 1)), np.array([[0], [2]]))
    with pytest.raises(ValueError):
        Panel(np.array([[np.nan], [0.0]]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Panel(np.zeros((3, 1)), np.zeros((2, 1)))
    p = Panel(np.zeros((2, 1)), np.array([[0, 1], [1, 1]]))
    assert (p.n, p.m, p.d) == (2, 2, 1)
    assert not p.labels.flags.writeable
    assert p.select_tasks([1]).labels.tolist() == [[1], [1]]


def test_psi_hat_validation():
    x = np.zeros((2, 1))
    with pytest.raises(ValueError):
        PsiHat(x, np.zeros((3, 5)), {"name": "exact"})
    with pytest.raises(ValueError):
        PsiHat(x, np.zeros((3, 2)), {"name": "exact"}, "FPAIF")
    with pytest.raises(ValueError):
        PsiHat(x, np.zeros((3, 2)), {"name": "exact"}, "FPAIF", np.array([0.0, 1.0]))
    assert PsiHat(x, np.zeros((3, 2)), {"name": "exact"}).T == 3
