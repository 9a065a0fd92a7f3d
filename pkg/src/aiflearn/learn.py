"""Training drivers for the error-rate (AIF) and false-positive (FPAIF) games."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .core import (AIF, FPAIF, FRESH_PARTITION, LINEAR_THRESHOLD, DualState, HyperParams,
                   Panel, PsiHat, RandomizedClassifier)
from .dynamics import (aif_costs, auditor_update, best_response_aif, best_response_fp,
                       check_rho_tilde, error_rates, fp_costs, fp_rates, initial_dual,
                       violations_from_rates)
from .oracle import make_oracle

log = logging.getLogger(__name__)


class NumericError(RuntimeError):
    """A NaN or infinity showed up during training."""


@dataclass(frozen=True)
class RoundRecord:
    """Statistics after round t.

    ``overall_error``, ``max_violation`` and ``spread`` describe the running
    average play up to and including round t, i.e. the model that would be
    returned if training stopped there. ``round_error`` and
    ``round_violation`` describe the pure play h_t against gamma_t.
    """

    round: int
    overall_error: float
    max_violation: float
    spread: float
    gamma_t: int
    lambda_l1: float
    lambda_min: float
    round_error: float
    round_violation: float


@dataclass(eq=False)
class TrainResult:
    p_hat: list
    gamma_hat: float
    lambda_hat: np.ndarray
    psi_hat: PsiHat
    trajectory: list
    manifest: dict
    proba: np.ndarray  # (n, m) probability each p_hat_j predicts 1
    gammas: np.ndarray = field(repr=False, default=None)

    @property
    def T(self) -> int:
        return len(self.trajectory)


def partition_problems(m: int, T: int, m0: int, rng: np.random.Generator) -> list:
    """T disjoint batches of m0 task indices from a seeded shuffle."""
    if m0 < 1:
        raise ValueError("fresh_partition needs m0 >= 1")
    if m0 * T > m:
        raise ValueError(f"cannot draw {T} disjoint batches of {m0} from {m} tasks; use full_batch")
    perm = rng.permutation(m)
    return [np.sort(perm[t * m0:(t + 1) * m0]) for t in range(T)]


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError("non-finite value encountered during training")


def _train(panel: Panel, hp: HyperParams, oracle, variant: str, rho_tilde=None) -> TrainResult:
    n, m, X, Y = panel.n, panel.m, panel.features, panel.labels
    rng = np.random.default_rng(hp.seed)
    batches = partition_problems(m, hp.T, hp.m0, rng) if hp.batch_mode == FRESH_PARTITION else None
    if batches is not None and hp.m0 * hp.T < m:
        log.info("%d tasks are outside every batch; they are trained but never audited",
                 m - hp.m0 * hp.T)

    dual: DualState = initial_dual(n, hp.B)
    hyps_by_task = [[] for _ in range(m)]
    weights = np.empty((hp.T, n))
    lam_sum = np.zeros(2 * n)
    gammas = np.empty(hp.T, dtype=np.int8)
    cum_pred = np.zeros((n, m))
    trajectory = []
    fp_skips = 0
    constant_plays = 0

    for t in range(hp.T):
        weights[t] = dual.w
        lam_sum += dual.lam
        if variant == AIF:
            hyps, gamma = best_response_aif(dual.w, panel, oracle)
        else:
            hyps, gamma = best_response_fp(dual.w, rho_tilde, panel, oracle)
        gammas[t] = gamma
        pred = np.empty((n, m))
        for j, h in enumerate(hyps):
            hyps_by_task[j].append(h)
            pred[:, j] = h.predict(X)
            constant_plays += h.kind != LINEAR_THRESHOLD
        cum_pred += pred

        cols = batches[t] if batches is not None else slice(None)
        if variant == AIF:
            rates = error_rates(pred[:, cols], Y[:, cols])
            all_rates = rates if batches is None else error_rates(pred, Y)
        else:
            rates, undefined = fp_rates(pred[:, cols], Y[:, cols])
            fp_skips += int(undefined.sum())
            all_rates = rates if batches is None else fp_rates(pred, Y)[0]
        r = violations_from_rates(rates, gamma, hp.alpha)
        _finite(r)

        avg = cum_pred / (t + 1)
        gamma_avg = float(np.mean(gammas[:t + 1]))
        avg_err_rates = error_rates(avg, Y)
        avg_rates = avg_err_rates if variant == AIF else fp_rates(avg, Y)[0]
        trajectory.append(RoundRecord(
            round=t + 1,
            overall_error=float(np.mean(avg_err_rates)),
            max_violation=float(np.max(np.abs(avg_rates - gamma_avg))),
            spread=float(np.max(avg_rates) - np.min(avg_rates)),
            gamma_t=int(gamma),
            lambda_l1=float(np.sum(dual.lam)),
            lambda_min=float(np.min(dual.lam)),
            round_error=float(np.mean(error_rates(pred, Y))),
            round_violation=float(np.max(np.abs(all_rates - gamma))),
        ))
        dual = auditor_update(dual, r, hp.eta)
        _finite(dual.theta, dual.lam)

    T = hp.T
    p_hat = [RandomizedClassifier.uniform(hs) for hs in hyps_by_task]
    oracle_spec = oracle.spec
    gamma_hat = float(np.mean(gammas))
    psi = PsiHat(X, weights, oracle_spec, variant,
                 rho_tilde if variant == FPAIF else None,
                 metadata={"alpha": hp.alpha, "gamma_hat": gamma_hat})
    manifest = {
        "version": __version__,
        "variant": variant,
        "hyperparams": hp.to_dict(),
        "oracle": oracle_spec,
        "n": n, "m": m, "d": panel.d,
        "batch_schedule": ([b.tolist() for b in batches] if batches is not None else "all"),
        "events": {
            "fp_undefined_skips": fp_skips,
            "constant_plays": constant_plays,
            "oracle_calls": T * m,
            "auditor_updates": T,
        },
    }
    return TrainResult(p_hat=p_hat, gamma_hat=gamma_hat, lambda_hat=lam_sum / T, psi_hat=psi,
                       trajectory=trajectory, manifest=manifest, proba=cum_pred / T, gammas=gammas)


def train_aif(panel: Panel, hp: HyperParams, oracle) -> TrainResult:
    """Run the error-rate game for hp.T rounds and return the average plays."""
    return _train(panel, hp, oracle, AIF)


def train_fpaif(panel: Panel, hp: HyperParams, oracle, rho_tilde) -> TrainResult:
    """False-positive variant; ``rho_tilde`` are per-individual estimates of P[f(x_i) = 0]."""
    rho = check_rho_tilde(rho_tilde, panel.n)
    return _train(panel, hp, oracle, FPAIF, rho)


def apply_psi_hat(psi: PsiHat, new_task_labels, oracle=None) -> RandomizedClassifier:
    """Map a task, given by its labels on the training individuals, to a classifier.

    Re-solves the T weighted CSC problems exactly as training did, so a
    training column maps back to its training mixture.
    """
    f = np.asarray(new_task_labels)
    if f.shape != (psi.n,):
        raise ValueError(f"expected {psi.n} labels, got shape {f.shape}")
    if not np.all((f == 0) | (f == 1)):
        raise ValueError("labels must be 0 or 1")
    f = f.astype(np.int8)
    if oracle is None:
        oracle = make_oracle(psi.oracle_spec, psi.features)
    hyps = []
    for w in psi.weight_archive:
        costs = aif_costs(w, f) if psi.variant == AIF else fp_costs(w, psi.rho_tilde, f)
        hyps.append(oracle.solve(*costs))
    return RandomizedClassifier.uniform(hyps)


def rho_tilde_from_holdout(labels, m0: Optional[int] = None) -> np.ndarray:
    """Zero-label frequencies from held-out task columns, clamped to [1/(2 m0), 1]."""
    y = np.asarray(labels, float)
    m0 = y.shape[1] if m0 is None else m0
    rho = np.mean(1.0 - y, axis=1)
    return np.clip(rho, 1.0 / (2 * m0), 1.0)
