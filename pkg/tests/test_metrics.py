import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from aiflearn.core import FULL_BATCH, H0, H1, Panel, RandomizedClassifier, derive_hyperparams
from aiflearn.dynamics import error_rates, rho_hat, violations_from_rates
from aiflearn.learn import TrainResult, train_aif
from aiflearn.metrics import (DEFAULT_OMEGAS, baseline_at_spread, equilibrium_audit,
                              fairness_report, max_auditor_payoff, mixture_baseline,
                              report_from_proba, rho_decomposition_check,
                              rho_decomposition_residual)
from aiflearn.oracle import ExactOracle

from conftest import random_panel

coin = RandomizedClassifier.uniform([H0, H1])


def test_report_examples(rng):
    panel = random_panel(rng, 5, 3, 2)
    rep = fairness_report([coin] * 3, 0.5, panel)
    assert np.all(rep.individual_rates == 0.5)
    assert rep.spread == 0.0 and rep.overall_error == 0.5

    perfect = report_from_proba(panel.labels.astype(float), panel.labels, 0.3)
    assert np.all(perfect.individual_rates == 0.0)
    assert perfect.max_abs_deviation == pytest.approx(0.3)
    with pytest.raises(ValueError):
        fairness_report([coin], 0.5, panel)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["AIF", "FPAIF"]))
def test_report_invariants(seed, variant):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, (6, 4))
    proba = rng.random((6, 4))
    rep = report_from_proba(proba, labels, float(rng.random()), variant)
    assert rep.spread <= 2 * rep.max_abs_deviation + 1e-15
    assert rep.overall_error == pytest.approx(np.mean(error_rates(proba, labels)), abs=1e-12)
    assert rep.satisfied_at == rep.max_abs_deviation


def test_rho_decomposition_constant_zero(rng):
    panel = random_panel(rng, 6, 5, 1)
    proba = np.zeros((6, 5))
    assert np.allclose(error_rates(proba, panel.labels), 1 - rho_hat(panel.labels))
    assert rho_decomposition_residual(proba, panel.labels) == 0.0
    assert rho_decomposition_check([RandomizedClassifier.pure(H0)] * 5, panel) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_rho_decomposition_identity(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 8, size=2)
    labels = rng.integers(0, 2, (n, m))
    assert rho_decomposition_residual(rng.random((n, m)), labels) <= 1e-12


def test_baseline_examples():
    panel = Panel(np.array([[0.0], [1.0], [2.0], [3.0]]),
                  np.array([[0, 1], [1, 0], [1, 1], [0, 0]]))
    curve = mixture_baseline(panel, ExactOracle(panel.features), (0.0, 0.5, 1.0))
    assert np.all(curve.individual_rates[2] == 0.5) and curve.spreads[2] == 0.0
    assert np.array_equal(curve.individual_rates[0], curve.erm_rates)
    expected = 0.5 * curve.erm_rates + 0.25
    assert np.allclose(curve.individual_rates[1], expected, atol=1e-15)
    with pytest.raises(ValueError):
        mixture_baseline(panel, ExactOracle(panel.features), (1.5,))


def test_baseline_point_example():
    rates = np.full(3, 0.2)
    omega_rates = (1 - 0.5) * rates + 0.5 * 0.5
    assert np.allclose(omega_rates, 0.35)


@given(st.integers(0, 2**32 - 1))
def test_baseline_is_affine(seed):
    rng = np.random.default_rng(seed)
    panel = random_panel(rng, 5, 3, 1)
    curve = mixture_baseline(panel, ExactOracle(panel.features), DEFAULT_OMEGAS)
    for k, omega in enumerate(curve.mixture_weights):
        expected = curve.erm_rates + omega * (0.5 - curve.erm_rates)
        assert np.allclose(curve.individual_rates[k], expected, atol=1e-12)
        assert curve.overall_errors[k] == pytest.approx(curve.individual_rates[k].mean(), abs=1e-12)


def test_baseline_at_spread():
    erm = np.array([0.1, 0.3, 0.5])
    omega, err = baseline_at_spread(erm, 0.2)
    assert omega == pytest.approx(0.5)
    assert err == pytest.approx(np.mean(0.5 * erm + 0.25))
    assert baseline_at_spread(erm, 0.5) == (0.0, pytest.approx(0.3))


def test_auditor_vertex_matches_grid():
    rng = np.random.default_rng(5)
    B = 2.0
    grid = np.linspace(0, B, 21)
    pts = np.array([p for p in itertools.product(grid, repeat=4) if sum(p) <= B + 1e-12])
    for _ in range(30):
        r = rng.normal(size=4)
        assert max_auditor_payoff(r, B) == pytest.approx(max(0.0, float(np.max(pts @ r))), abs=1e-12)


@given(arrays(float, 4, elements=st.floats(-1, 1)), st.floats(0.1, 10))
def test_auditor_payoff_bounds_random_duals(r, B):
    best = max_auditor_payoff(r, B)
    lam = np.random.default_rng(0).dirichlet(np.ones(5), size=50)[:, :4] * B
    assert np.all(lam @ r <= best + 1e-12)


def _as_result(panel, proba, gamma_hat, lam, alpha, B):
    manifest = {"variant": "AIF", "hyperparams": {"alpha": alpha, "B": B}}
    return TrainResult(p_hat=[], gamma_hat=gamma_hat, lambda_hat=lam, psi_hat=None,
                       trajectory=[], manifest=manifest, proba=proba)


def test_audit_of_coin_flip_play(rng):
    panel = random_panel(rng, 3, 2, 1)
    alpha, B = 0.1, 5.0
    coin_play = np.full((3, 2), 0.5)
    # no constraint is violated, so against a zero dual the Auditor gains nothing
    audit = equilibrium_audit(_as_result(panel, coin_play, 0.5, np.zeros(6), alpha, B), panel)
    assert audit.auditor_gap == 0.0
    assert audit.learner_gap >= -1e-12

    # against a positive dual the best deviation is lambda = 0, worth -lambda . r
    lam = np.full(6, 0.3)
    audit = equilibrium_audit(_as_result(panel, coin_play, 0.5, lam, alpha, B), panel)
    r = violations_from_rates(np.full(3, 0.5), 0.5, alpha)
    assert audit.lagrangian == pytest.approx(0.5 + lam @ r, abs=1e-12)
    assert audit.auditor_gap == pytest.approx(-(lam @ r), abs=1e-12)


def test_audit_of_trained_run(rng):
    panel = random_panel(rng, 3, 2, 1)
    hp = derive_hyperparams(0.2, 0.2, 3, 2, {"T": 5000, "eta": "horizon", "batch_mode": FULL_BATCH})
    res = train_aif(panel, hp, ExactOracle(panel.features))
    learner_gap, auditor_gap, passed = equilibrium_audit(res, panel, nu_target=0.25)
    assert learner_gap >= -1e-12 and auditor_gap >= -1e-12
    assert passed
