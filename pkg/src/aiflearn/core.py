"""Domain types shared across the package.

Everything here is an immutable value. Arrays held by the frozen dataclasses
are marked read-only on construction so they can be shared freely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

LINEAR_THRESHOLD = "linear_threshold"
CONSTANT_ZERO = "constant_zero"
CONSTANT_ONE = "constant_one"
HYPOTHESIS_KINDS = (LINEAR_THRESHOLD, CONSTANT_ZERO, CONSTANT_ONE)

AIF = "AIF"
FPAIF = "FPAIF"
VARIANTS = (AIF, FPAIF)

FRESH_PARTITION = "fresh_partition"
FULL_BATCH = "full_batch"
BATCH_MODES = (FRESH_PARTITION, FULL_BATCH)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Panel:
    """n individuals with d features, and an n x m matrix of binary task labels."""

    features: np.ndarray
    labels: np.ndarray
    individual_ids: tuple = ()
    task_ids: tuple = ()

    def __post_init__(self):
        x = _frozen(self.features, float)
        y = np.asarray(self.labels)
        if x.ndim != 2 or y.ndim != 2:
            raise ValueError("features and labels must be 2-d")
        n, d = x.shape
        if n < 1 or d < 1 or y.shape[1] < 1:
            raise ValueError("need n >= 1, d >= 1, m >= 1")
        if y.shape[0] != n:
            raise ValueError(f"labels have {y.shape[0]} rows, features have {n}")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain missing or non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("label entries must be exactly 0 or 1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", _frozen(y, np.int8))
        ids = tuple(self.individual_ids) or tuple(str(i) for i in range(n))
        tids = tuple(self.task_ids) or tuple(str(j) for j in range(y.shape[1]))
        if len(ids) != n or len(tids) != y.shape[1]:
            raise ValueError("id lists do not match the matrix shapes")
        object.__setattr__(self, "individual_ids", ids)
        object.__setattr__(self, "task_ids", tids)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return self.labels.shape[1]

    def select_tasks(self, columns: Sequence[int]) -> "Panel":
        columns = list(columns)
        return Panel(self.features, self.labels[:, columns], self.individual_ids,
                     tuple(self.task_ids[j] for j in columns))


@dataclass(frozen=True)
class Hypothesis:
    """Deterministic binary classifier.

    A linear threshold predicts 1 iff ``coefficients[:-1] . x + coefficients[-1] > 0``;
    a score of exactly zero maps to 0.
    """

    kind: str
    coefficients: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in HYPOTHESIS_KINDS:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.kind == LINEAR_THRESHOLD:
            if self.coefficients is None or len(self.coefficients) < 2:
                raise ValueError("linear_threshold needs d weights plus an intercept")
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        elif self.coefficients is not None:
            raise ValueError("constant classifiers carry no coefficients")

    @classmethod
    def linear(cls, weights, intercept) -> "Hypothesis":
        return cls(LINEAR_THRESHOLD, tuple(np.asarray(weights, float).tolist()) + (float(intercept),))

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Labels for every row of an (n, d) matrix as an int8 vector."""
        x = np.asarray(features, dtype=float)
        if x.ndim != 2:
            raise ValueError("predict expects a 2-d feature matrix")
        if self.kind == CONSTANT_ZERO:
            return np.zeros(x.shape[0], dtype=np.int8)
        if self.kind == CONSTANT_ONE:
            return np.ones(x.shape[0], dtype=np.int8)
        coef = np.asarray(self.coefficients)
        if x.shape[1] != coef.size - 1:
            raise ValueError(f"feature dimension {x.shape[1]} != hypothesis dimension {coef.size - 1}")
        return (x @ coef[:-1] + coef[-1] > 0).astype(np.int8)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.coefficients is not None:
            out["coefficients"] = list(self.coefficients)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Hypothesis":
        coef = data.get("coefficients")
        return cls(data["kind"], tuple(coef) if coef is not None else None)


H0 = Hypothesis(CONSTANT_ZERO)
H1 = Hypothesis(CONSTANT_ONE)


def evaluate(h: Hypothesis, x) -> int:
    """Label a single feature vector."""
    return int(h.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])


@dataclass(frozen=True, eq=False)
class RandomizedClassifier:
    support: tuple
    weights: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        w = _frozen(self.weights, float)
        if not support:
            raise ValueError("support must be nonempty")
        if w.shape != (len(support),):
            raise ValueError("weights must match support length")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, hypotheses: Sequence[Hypothesis]) -> "RandomizedClassifier":
        k = len(hypotheses)
        return cls(tuple(hypotheses), np.full(k, 1.0 / k))

    @classmethod
    def pure(cls, h: Hypothesis) -> "RandomizedClassifier":
        return cls((h,), np.ones(1))

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """Probability of predicting 1 on each row.

        A uniform mixture returns an exact vote count divided by its size.
        """
        votes = np.stack([h.predict(features) for h in self.support]).astype(float)
        if np.all(self.weights == self.weights[0]):
            return votes.sum(axis=0) / len(self.support)
        return self.weights @ votes

    def __eq__(self, other):
        if not isinstance(other, RandomizedClassifier):
            return NotImplemented
        return self.support == other.support and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DualState:
    """Auditor state: log-potentials theta, duals lambda, and weights w.

    theta and lambda are interleaved per individual as (+, -) pairs, so
    ``lam[2*i]`` is lambda_i^+ and ``lam[2*i + 1]`` is lambda_i^-.
    """

    theta: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    bound: float

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def lam_plus(self) -> np.ndarray:
        return self.lam[0::2]

    @property
    def lam_minus(self) -> np.ndarray:
        return self.lam[1::2]


@dataclass(frozen=True)
class HyperParams:
    alpha: float
    nu: float
    B: float
    T: int
    eta: float
    m0: int
    batch_mode: str
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 < self.nu <= 1:
            raise ValueError("nu must lie in (0, 1]")
        if self.B <= 0 or self.eta <= 0 or self.T < 1:
            raise ValueError("B, eta must be positive and T >= 1")
        if self.batch_mode not in BATCH_MODES:
            raise ValueError(f"unknown batch_mode {self.batch_mode!r}")
        if self.batch_mode == FRESH_PARTITION and self.m0 < 1:
            raise ValueError("fresh_partition needs m0 >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("alpha", "nu", "B", "T", "eta", "m0", "batch_mode", "seed")}


def formula_T(alpha: float, nu: float, n: int) -> int:
    B = (1 + 2 * nu) / alpha
    return math.ceil(16 * B**2 * (1 + 2 * alpha) ** 2 * math.log(2 * n + 1) / nu**2)


def horizon_eta(alpha: float, n: int, T: int) -> float:
    """Step size minimizing the exponentiated-gradient regret bound over T rounds.

    At the default T this coincides with the default step size; it is the
    natural choice when T is overridden (for example capped).
    """
    return math.sqrt(math.log(2 * n + 1) / T) / (1 + 2 * alpha)


def derive_hyperparams(alpha: float, nu: float, n: int, m: int, overrides: Optional[dict] = None) -> HyperParams:
    """Hyperparameters from (alpha, nu, n, m), optionally overriding any field.

    ``overrides["eta"] = "horizon"`` picks :func:`horizon_eta` for the final T.
    Falls back to full-batch dual updates (m0 = m) when m is smaller than T and
    no batch mode was requested explicitly.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    overrides = dict(overrides or {})
    unknown = set(overrides) - {"B", "T", "eta", "m0", "batch_mode", "seed"}
    if unknown:
        raise ValueError(f"unknown hyperparameter overrides: {sorted(unknown)}")
    B = float(overrides.get("B", (1 + 2 * nu) / alpha))
    T = int(overrides.get("T", math.ceil(16 * B**2 * (1 + 2 * alpha) ** 2 * math.log(2 * n + 1) / nu**2)))
    eta = overrides.get("eta", nu / (4 * (1 + 2 * alpha) ** 2 * B))
    eta = horizon_eta(alpha, n, T) if eta == "horizon" else float(eta)
    mode = overrides.get("batch_mode")
    m0 = overrides.get("m0", m // T)
    if mode is None:
        mode = FRESH_PARTITION if m0 >= 1 else FULL_BATCH
    if mode == FULL_BATCH:
        m0 = m
    return HyperParams(alpha=alpha, nu=nu, B=B, T=T, eta=eta, m0=int(m0), batch_mode=mode,
                       seed=int(overrides.get("seed", 0)))


@dataclass(frozen=True, eq=False)
class PsiHat:
    """Task-to-classifier mapping: training features plus the per-round weight archive."""

    features: np.ndarray
    weight_archive: np.ndarray  # (T, n)
    oracle_spec: dict
    variant: str = AIF
    rho_tilde: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(self.features))
        W = _frozen(self.weight_archive)
        if W.ndim != 2 or W.shape[1] != self.features.shape[0]:
            raise ValueError("weight archive must be (T, n)")
        object.__setattr__(self, "weight_archive", W)
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == FPAIF:
            if self.rho_tilde is None:
                raise ValueError("FPAIF mapping needs rho_tilde")
            rho = _frozen(self.rho_tilde)
            if rho.shape != (self.features.shape[0],) or np.any(rho <= 0) or np.any(rho > 1):
                raise ValueError("rho_tilde must be n values in (0, 1]")
            object.__setattr__(self, "rho_tilde", rho)

    @property
    def T(self) -> int:
        return self.weight_archive.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class FairnessReport:
    individual_rates: np.ndarray
    gamma_hat: float
    max_abs_deviation: float
    spread: float
    overall_error: float
    satisfied_at: float
    variant: str = AIF

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "gamma_hat": self.gamma_hat,
            "max_abs_deviation": self.max_abs_deviation,
            "spread": self.spread,
            "overall_error": self.overall_error,
            "satisfied_at": self.satisfied_at,
            "individual_rates": [float(v) for v in self.individual_rates],
        }


def with_seed(hp: HyperParams, seed: int) -> HyperParams:
    return replace(hp, seed=int(seed))
