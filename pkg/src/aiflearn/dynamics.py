"""One round of the Learner/Auditor game.

Rates are computed from an (n, m) matrix ``proba`` whose entry (i, j) is the
probability that task j's randomized classifier predicts 1 on individual i.
Every quantity below (individual error, false-positive rate, Lagrangian) is
linear in that matrix, which is what lets the averaged play be evaluated
from per-round predictions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AIF, FPAIF, DualState, Panel, RandomizedClassifier

# ---------------------------------------------------------------------------
# rates


def proba_matrix(classifiers: Sequence[RandomizedClassifier], features: np.ndarray) -> np.ndarray:
    return np.column_stack([p.predict_proba(features) for p in classifiers])


def _check(classifiers, panel: Panel):
    if len(classifiers) != panel.m:
        raise ValueError(f"{len(classifiers)} classifiers for {panel.m} label columns")


def error_rates(proba: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-individual error averaged over tasks."""
    f = np.asarray(labels, float)
    return np.mean(proba * (1.0 - f) + (1.0 - proba) * f, axis=1)


def rho_hat(labels: np.ndarray) -> np.ndarray:
    """Fraction of tasks labeling each individual 0."""
    return np.mean(1.0 - np.asarray(labels, float), axis=1)


def fp_rates(proba: np.ndarray, labels: np.ndarray):
    """False-positive rates and the mask of individuals with no 0-labeled task.

    Masked individuals get rate 0.
    """
    f = np.asarray(labels, float)
    fp_mass = np.sum(proba * (1.0 - f), axis=1)
    zeros = np.sum(1.0 - f, axis=1)
    undefined = zeros == 0
    rates = np.divide(fp_mass, zeros, out=np.zeros_like(fp_mass), where=~undefined)
    return rates, undefined


def fn_rates(proba: np.ndarray, labels: np.ndarray):
    f = np.asarray(labels, float)
    fn_mass = np.sum((1.0 - proba) * f, axis=1)
    ones = np.sum(f, axis=1)
    undefined = ones == 0
    rates = np.divide(fn_mass, ones, out=np.zeros_like(fn_mass), where=~undefined)
    return rates, undefined


def individual_errors(classifiers: Sequence[RandomizedClassifier], panel: Panel) -> np.ndarray:
    _check(classifiers, panel)
    return error_rates(proba_matrix(classifiers, panel.features), panel.labels)


def individual_error(i: int, classifiers: Sequence[RandomizedClassifier], panel: Panel) -> float:
    _check(classifiers, panel)
    x = panel.features[i:i + 1]
    f = panel.labels[i].astype(float)
    probs = np.array([p.predict_proba(x)[0] for p in classifiers])
    return float(np.mean(probs * (1.0 - f) + (1.0 - probs) * f))


# ---------------------------------------------------------------------------
# violations and the Lagrangian


@dataclass(frozen=True, eq=False)
class ViolationVector:
    """Interleaved (E_i - gamma - 2 alpha, gamma - E_i - 2 alpha) pairs."""

    values: np.ndarray
    alpha: float
    variant: str = AIF
    skipped: int = 0

    @property
    def n(self) -> int:
        return self.values.size // 2


def violations_from_rates(rates: np.ndarray, gamma: float, alpha: float) -> np.ndarray:
    dev = np.asarray(rates, float) - gamma
    out = np.empty(2 * dev.size)
    out[0::2] = dev - 2 * alpha
    out[1::2] = -dev - 2 * alpha
    return out


def violation_vector_aif(classifiers, gamma: float, panel: Panel, alpha: float) -> ViolationVector:
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    rates = individual_errors(classifiers, panel)
    return ViolationVector(violations_from_rates(rates, gamma, alpha), alpha, AIF)


def violation_vector_fp(classifiers, gamma: float, panel: Panel, alpha: float,
                        skip_undefined: bool = True) -> ViolationVector:
    """False-positive violations; rho-hat comes from the panel's own columns.

    An individual labeled 1 by every task has no false-positive rate. With
    ``skip_undefined`` its rate is taken as 0 and counted in ``skipped``;
    otherwise it is an error.
    """
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    _check(classifiers, panel)
    rates, undefined = fp_rates(proba_matrix(classifiers, panel.features), panel.labels)
    if undefined.any() and not skip_undefined:
        raise ValueError(f"individuals {np.flatnonzero(undefined).tolist()} have no 0-labeled task")
    return ViolationVector(violations_from_rates(rates, gamma, alpha), alpha, FPAIF, int(undefined.sum()))


def lagrangian_from_rates(overall_error: float, rates: np.ndarray, gamma: float,
                          lam: np.ndarray, alpha: float) -> float:
    return float(overall_error + np.dot(lam, violations_from_rates(rates, gamma, alpha)))


def lagrangian(classifiers, gamma: float, dual: DualState, panel: Panel, alpha: float,
               variant: str = AIF) -> float:
    """Overall error plus lambda . r for the chosen fairness variant."""
    _check(classifiers, panel)
    proba = proba_matrix(classifiers, panel.features)
    err_rates = error_rates(proba, panel.labels)
    if variant == AIF:
        rates = err_rates
    elif variant == FPAIF:
        rates, _ = fp_rates(proba, panel.labels)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return lagrangian_from_rates(float(np.mean(err_rates)), rates, gamma, dual.lam, alpha)


# ---------------------------------------------------------------------------
# Learner


def gamma_response(w: np.ndarray) -> int:
    return int(np.sum(w) > 0)


def aif_costs(w: np.ndarray, f: np.ndarray):
    """(cost1, cost0) for one task under the error-rate game."""
    f = np.asarray(f, float)
    scale = np.asarray(w, float) + 1.0 / f.size
    return scale * (1.0 - f), scale * f


def fp_costs(w: np.ndarray, rho_tilde: np.ndarray, f: np.ndarray):
    """(cost1, cost0) for one task under the false-positive game."""
    f = np.asarray(f, float)
    cost1 = (np.asarray(w, float) / rho_tilde + 1.0 / f.size) * (1.0 - f)
    return cost1, f / f.size


def best_response_aif(w: np.ndarray, panel: Panel, oracle):
    """Per-task CSC solutions for weights w, plus the gamma play."""
    w = np.asarray(w, float)
    if w.shape != (panel.n,):
        raise ValueError("w must have one entry per individual")
    hyps = [oracle.solve(*aif_costs(w, panel.labels[:, j])) for j in range(panel.m)]
    return hyps, gamma_response(w)


def check_rho_tilde(rho_tilde, n: int) -> np.ndarray:
    rho = np.asarray(rho_tilde, float)
    if rho.shape != (n,):
        raise ValueError("rho_tilde must have one entry per individual")
    if np.any(rho <= 0) or np.any(rho > 1):
        raise ValueError("rho_tilde entries must lie in (0, 1]")
    return rho


def best_response_fp(w: np.ndarray, rho_tilde: np.ndarray, panel: Panel, oracle):
    w = np.asarray(w, float)
    if w.shape != (panel.n,):
        raise ValueError("w must have one entry per individual")
    rho = check_rho_tilde(rho_tilde, panel.n)
    hyps = [oracle.solve(*fp_costs(w, rho, panel.labels[:, j])) for j in range(panel.m)]
    return hyps, gamma_response(w)


# ---------------------------------------------------------------------------
# Auditor


def dual_from_theta(theta: np.ndarray, bound: float) -> DualState:
    """lambda_k = B exp(theta_k) / (1 + sum exp(theta)), evaluated with a max-shift."""
    theta = np.array(theta, dtype=float)
    shift = max(0.0, float(np.max(theta)))
    e = np.exp(theta - shift)
    lam = bound * e / (np.exp(-shift) + np.sum(e))
    w = lam[0::2] - lam[1::2]
    for a in (theta, lam, w):
        a.setflags(write=False)
    return DualState(theta=theta, lam=lam, w=w, bound=float(bound))


def initial_dual(n: int, bound: float) -> DualState:
    return dual_from_theta(np.zeros(2 * n), bound)


def auditor_update(dual: DualState, r, eta: float) -> DualState:
    """Exponentiated-gradient step on the violation vector."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    values = r.values if isinstance(r, ViolationVector) else np.asarray(r, float)
    if values.shape != dual.theta.shape:
        raise ValueError("violation vector does not match the dual dimension")
    if not np.any(values):
        return dual
    return dual_from_theta(dual.theta + eta * values, dual.bound)
