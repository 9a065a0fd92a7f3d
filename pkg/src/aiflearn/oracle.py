"""Cost-sensitive classification (CSC) oracles.

A CSC instance gives, for each individual, the cost of predicting 1 and the
cost of predicting 0. Costs may be negative. An oracle returns the hypothesis
minimizing total cost over its class.

Two oracles are provided:

* ``RegressionOracle``: fits least-squares models for both cost vectors and
  thresholds on the predicted difference, with the two constant classifiers
  as fallbacks.
* ``ExactOracle``: exhaustive argmin over a finite hypothesis pool.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import H0, H1, Hypothesis

POOL_GUARD = 10_000


@dataclass(frozen=True, eq=False)
class CscInstance:
    features: np.ndarray
    cost1: np.ndarray
    cost0: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, float)
        c1 = np.asarray(self.cost1, float)
        c0 = np.asarray(self.cost0, float)
        if x.ndim != 2 or c1.shape != (x.shape[0],) or c0.shape != (x.shape[0],):
            raise ValueError("cost vectors must have one entry per feature row")
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c0))):
            raise ValueError("costs must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "cost1", c1)
        object.__setattr__(self, "cost0", c0)


def labeling_cost(labels: np.ndarray, cost1: np.ndarray, cost0: np.ndarray) -> float:
    """Total cost of a 0/1 labeling."""
    labels = np.asarray(labels, float)
    return float(np.dot(cost1, labels) + np.dot(cost0, 1.0 - labels))


def csc_cost(h: Hypothesis, inst: CscInstance) -> float:
    return labeling_cost(h.predict(inst.features), inst.cost1, inst.cost0)


class RegressionOracle:
    """Linear-threshold heuristic bound to a fixed feature matrix.

    The pseudo-inverse of ``[X, 1]`` is computed once, so each solve is two
    matrix-vector products. Singular designs get the minimum-norm fit.
    """

    name = "regression"

    def __init__(self, features: np.ndarray):
        self.features = np.asarray(features, float)
        n = self.features.shape[0]
        self._design = np.hstack([self.features, np.ones((n, 1))])
        self._pinv = np.linalg.pinv(self._design)

    @property
    def spec(self) -> dict:
        return {"name": self.name}

    def fit_costs(self, cost1: np.ndarray, cost0: np.ndarray):
        """Least-squares coefficients (weights + intercept) for both cost vectors."""
        return self._pinv @ np.asarray(cost1, float), self._pinv @ np.asarray(cost0, float)

    def solve(self, cost1: np.ndarray, cost0: np.ndarray) -> Hypothesis:
        coef1, coef0 = self.fit_costs(cost1, cost0)
        h_star = Hypothesis.linear((coef0 - coef1)[:-1], (coef0 - coef1)[-1])
        best, best_cost = h_star, labeling_cost(h_star.predict(self.features), cost1, cost0)
        for h in (H0, H1):
            c = labeling_cost(h.predict(self.features), cost1, cost0)
            if c < best_cost:
                best, best_cost = h, c
        return best


class ExactOracle:
    """Exhaustive CSC over a finite pool; ties go to the lowest pool index."""

    name = "exact"

    def __init__(self, features: np.ndarray, pool: Sequence[Hypothesis] | None = None):
        self.features = np.asarray(features, float)
        self.pool = tuple(pool) if pool is not None else make_threshold_pool(self.features)
        if not self.pool:
            raise ValueError("hypothesis pool is empty")
        self._pred = np.stack([h.predict(self.features) for h in self.pool]).astype(float)

    @property
    def spec(self) -> dict:
        # a default pool is rebuilt from the features, so naming it is enough
        return {"name": self.name, "pool": "threshold"}

    def pool_costs(self, cost1: np.ndarray, cost0: np.ndarray) -> np.ndarray:
        return self._pred @ np.asarray(cost1, float) + (1.0 - self._pred) @ np.asarray(cost0, float)

    def solve(self, cost1: np.ndarray, cost0: np.ndarray) -> Hypothesis:
        return self.pool[int(np.argmin(self.pool_costs(cost1, cost0)))]


def solve_regression_heuristic(inst: CscInstance) -> Hypothesis:
    return RegressionOracle(inst.features).solve(inst.cost1, inst.cost0)


def solve_exact(inst: CscInstance, pool: Sequence[Hypothesis]) -> Hypothesis:
    if not pool:
        raise ValueError("hypothesis pool is empty")
    return ExactOracle(inst.features, pool).solve(inst.cost1, inst.cost0)


def make_threshold_pool(features: np.ndarray) -> list:
    """Constants plus both orientations of every axis-aligned midpoint threshold.

    A coordinate with a single distinct value gets one threshold half a unit
    below that value, so a lone point is still split both ways.
    """
    x = np.asarray(features, float)
    n, d = x.shape
    if n * d > POOL_GUARD:
        raise ValueError(f"threshold pool guard exceeded: n*d = {n * d} > {POOL_GUARD}")
    pool = [H0, H1]
    for k in range(d):
        vals = np.unique(x[:, k])
        cuts = (vals[:-1] + vals[1:]) / 2 if vals.size > 1 else vals - 0.5
        for cut in cuts:
            e = np.zeros(d)
            e[k] = 1.0
            pool.append(Hypothesis.linear(e, -cut))   # x_k > cut
            pool.append(Hypothesis.linear(-e, cut))   # x_k < cut
    return pool


def make_oracle(spec: dict, features: np.ndarray):
    name = spec.get("name")
    if name == RegressionOracle.name:
        return RegressionOracle(features)
    if name == ExactOracle.name:
        return ExactOracle(features)
    raise ValueError(f"unknown oracle {name!r}")
