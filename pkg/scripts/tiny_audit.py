"""Exact-oracle check of the in-sample bound and the equilibrium gaps on tiny panels.

    python scripts/tiny_audit.py [--instances 20] [--seed 2024] [--cap 5000]
"""
import argparse

import numpy as np

from aiflearn.core import FULL_BATCH, Panel, derive_hyperparams, formula_T
from aiflearn.dynamics import rho_hat
from aiflearn.learn import train_aif, train_fpaif
from aiflearn.metrics import equilibrium_audit, report_from_proba
from aiflearn.oracle import ExactOracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--cap", type=int, default=5000)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--nu", type=float, default=0.2)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("n m d T   aif_dev  fp_dev   learner_gap auditor_gap")
    for _ in range(args.instances):
        n, m, d = int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3))
        panel = Panel(rng.normal(size=(n, d)), rng.integers(0, 2, size=(n, m)))
        T = min(args.cap, formula_T(args.alpha, args.nu, n))
        hp = derive_hyperparams(args.alpha, args.nu, n, m,
                                {"T": T, "eta": "horizon", "batch_mode": FULL_BATCH})
        oracle = ExactOracle(panel.features)
        aif = train_aif(panel, hp, oracle)
        rho = rho_hat(panel.labels)
        fp = train_fpaif(panel, hp, oracle, np.where(rho > 0, rho, 1.0))
        dev = report_from_proba(aif.proba, panel.labels, aif.gamma_hat).max_abs_deviation
        fdev = report_from_proba(fp.proba, panel.labels, fp.gamma_hat, "FPAIF").max_abs_deviation
        audit = equilibrium_audit(aif, panel)
        print(f"{n} {m} {d} {T} {dev:.4f}   {fdev:.4f}   {audit.learner_gap:.4f}      "
              f"{audit.auditor_gap:.4f}")


if __name__ == "__main__":
    main()
