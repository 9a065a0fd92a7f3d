"""Fairness reports, the random-mixture baseline, and equilibrium audits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AIF, FPAIF, FairnessReport, Panel
from .dynamics import (aif_costs, error_rates, fn_rates, fp_costs, fp_rates, gamma_response,
                       proba_matrix, rho_hat, violations_from_rates)
from .oracle import ExactOracle

DEFAULT_OMEGAS = tuple(round(0.1 * k, 1) for k in range(11))


def report_from_proba(proba: np.ndarray, labels: np.ndarray, gamma_hat: float,
                      variant: str = AIF) -> FairnessReport:
    err = error_rates(proba, labels)
    if variant == AIF:
        rates = err
    elif variant == FPAIF:
        rates, _ = fp_rates(proba, labels)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    dev = float(np.max(np.abs(rates - gamma_hat)))
    return FairnessReport(
        individual_rates=rates,
        gamma_hat=float(gamma_hat),
        max_abs_deviation=dev,
        spread=float(np.max(rates) - np.min(rates)),
        overall_error=float(np.mean(err)),
        satisfied_at=dev,
        variant=variant,
    )


def fairness_report(classifiers, gamma_hat: float, panel: Panel, variant: str = AIF,
                    alpha: float | None = None) -> FairnessReport:
    """Per-individual rates and their deviation from gamma_hat.

    ``alpha`` is accepted for symmetry with the training calls; the report
    itself does not depend on it (``satisfied_at`` is the tightest slack).
    """
    if len(classifiers) != panel.m:
        raise ValueError(f"{len(classifiers)} classifiers for {panel.m} label columns")
    return report_from_proba(proba_matrix(classifiers, panel.features), panel.labels,
                             gamma_hat, variant)


def rho_decomposition_residual(proba: np.ndarray, labels: np.ndarray) -> float:
    err = error_rates(proba, labels)
    rho = rho_hat(labels)
    fp, _ = fp_rates(proba, labels)
    fn, _ = fn_rates(proba, labels)
    return float(np.max(np.abs(err - (rho * fp + (1.0 - rho) * fn))))


def rho_decomposition_check(classifiers, panel: Panel) -> float:
    """Max over individuals of |E - (rho FP + (1 - rho) FN)|."""
    return rho_decomposition_residual(proba_matrix(classifiers, panel.features), panel.labels)


# ---------------------------------------------------------------------------
# random-mixture baseline


@dataclass(frozen=True, eq=False)
class BaselineCurve:
    mixture_weights: tuple
    individual_rates: np.ndarray  # (len(weights), n)
    overall_errors: np.ndarray
    spreads: np.ndarray
    erm_rates: np.ndarray


def erm_proba(panel: Panel, oracle) -> np.ndarray:
    """Predictions of the per-task unconstrained error minimizers."""
    w0 = np.zeros(panel.n)
    return np.column_stack([oracle.solve(*aif_costs(w0, panel.labels[:, j])).predict(panel.features)
                            for j in range(panel.m)]).astype(float)


def mixture_baseline(panel: Panel, oracle, weights: Sequence[float] = DEFAULT_OMEGAS) -> BaselineCurve:
    """Mix per-task ERM with a fair coin: rate_i(omega) = (1 - omega) rate_i + omega / 2."""
    erm = error_rates(erm_proba(panel, oracle), panel.labels)
    omegas = tuple(float(w) for w in weights)
    if any(not 0 <= w <= 1 for w in omegas):
        raise ValueError("mixture weights must lie in [0, 1]")
    rates = np.array([(1.0 - w) * erm + w * 0.5 for w in omegas]).reshape(len(omegas), panel.n)
    return BaselineCurve(
        mixture_weights=omegas,
        individual_rates=rates,
        overall_errors=rates.mean(axis=1),
        spreads=rates.max(axis=1) - rates.min(axis=1),
        erm_rates=erm,
    )


def baseline_at_spread(erm_rates: np.ndarray, spread: float):
    """Smallest mixture weight whose spread is at most ``spread``, and its overall error.

    The mixture's spread is (1 - omega) times the ERM spread, so the
    threshold weight is available in closed form.
    """
    erm_rates = np.asarray(erm_rates, float)
    s0 = float(np.max(erm_rates) - np.min(erm_rates))
    omega = 0.0 if s0 <= spread else 1.0 - spread / s0
    return omega, float(np.mean((1.0 - omega) * erm_rates + omega * 0.5))


# ---------------------------------------------------------------------------
# equilibrium audit


@dataclass(frozen=True)
class AuditResult:
    learner_gap: float
    auditor_gap: float
    passed: bool
    lagrangian: float

    def __iter__(self):
        return iter((self.learner_gap, self.auditor_gap, self.passed))


def _rates(proba, labels, variant):
    return error_rates(proba, labels) if variant == AIF else fp_rates(proba, labels)[0]


def max_auditor_payoff(violations: np.ndarray, bound: float) -> float:
    """max of lambda . r over the nonnegative l1 ball of radius B."""
    return bound * max(0.0, float(np.max(violations)))


def equilibrium_audit(result, panel: Panel, pool=None, nu_target: float = 0.0) -> AuditResult:
    """Gains available to each player by deviating from the average plays.

    The Learner's deviation is an exact best response over ``pool`` (the
    threshold pool by default); the Auditor's is the vertex B e_k of the
    l1 ball at the most violated constraint, or 0 if none is violated.
    For the false-positive game the best response uses the panel's own
    zero-label rates, so the deviation is exact in-sample.
    """
    variant = result.manifest["variant"]
    hp = result.manifest["hyperparams"]
    alpha, B = hp["alpha"], hp["B"]
    Y = panel.labels
    oracle = ExactOracle(panel.features, pool)

    lam_hat = np.asarray(result.lambda_hat)
    r_hat = violations_from_rates(_rates(result.proba, Y, variant), result.gamma_hat, alpha)
    err_hat = float(np.mean(error_rates(result.proba, Y)))
    L_hat = err_hat + float(np.dot(lam_hat, r_hat))

    w = lam_hat[0::2] - lam_hat[1::2]
    gamma = gamma_response(w)
    if variant == AIF:
        hyps = [oracle.solve(*aif_costs(w, Y[:, j])) for j in range(panel.m)]
    else:
        rho = rho_hat(Y)
        # individuals with no 0 label have zero FP cost whatever rho is
        rho = np.where(rho > 0, rho, 1.0)
        hyps = [oracle.solve(*fp_costs(w, rho, Y[:, j])) for j in range(panel.m)]
    pred = np.column_stack([h.predict(panel.features) for h in hyps]).astype(float)
    r_br = violations_from_rates(_rates(pred, Y, variant), gamma, alpha)
    L_br = float(np.mean(error_rates(pred, Y))) + float(np.dot(lam_hat, r_br))

    learner_gap = L_hat - L_br
    auditor_gap = err_hat + max_auditor_payoff(r_hat, B) - L_hat
    return AuditResult(learner_gap, auditor_gap,
                       learner_gap <= nu_target and auditor_gap <= nu_target, L_hat)


def auditor_regret_budget(alpha: float, B: float, eta: float, T: int, n: int) -> float:
    """Full-batch exponentiated-gradient regret bound on the Auditor's average payoff."""
    return B * np.log(2 * n + 1) / (eta * T) + eta * B * (1 + 2 * alpha) ** 2
