"""Panels from the synthetic two-group generator or a Communities-and-Crime style CSV."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Panel

MISSING = {"", "?"}


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 200
    m: int = 50
    d: int = 20
    q: float = 0.8
    group1_fraction: float = 0.75
    seed: int = 0
    holdout_tasks: int = 0

    def __post_init__(self):
        if min(self.n, self.m, self.d) < 1 or self.holdout_tasks < 0:
            raise DataError("n, m, d must be positive and holdout_tasks nonnegative")
        if not 0.5 <= self.q <= 1:
            raise DataError("q must lie in [0.5, 1]")
        if not 0 < self.group1_fraction < 1:
            raise DataError("group1_fraction must lie in (0, 1)")


@dataclass(eq=False)
class SyntheticData:
    panel: Panel
    holdout_labels: np.ndarray  # (n, holdout_tasks)
    group1: np.ndarray          # bool mask
    majority: np.ndarray        # (n, m) bool, True where w_maj labeled the entry


def _label_tasks(x, k, q, group1, rng):
    w_pairs = rng.integers(0, 2, size=(k, 2, x.shape[1])) * 2 - 1
    coins = rng.random((x.shape[0], k))
    p_major = np.where(group1, q, 1.0 - q)[:, None]
    majority = coins < p_major
    score_maj = x @ w_pairs[:, 0, :].T
    score_min = x @ w_pairs[:, 1, :].T
    labels = (np.where(majority, score_maj, score_min) > 0).astype(np.int8)
    return labels, majority


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    """Two-group synthetic panel.

    Draw order from one PCG64 stream: features, then the m (majority,
    minority) weight pairs, then the n x m majority coins; the held-out
    tasks repeat the last two steps afterwards, so adding held-out tasks
    never changes the training panel.
    """
    rng = np.random.default_rng(spec.seed)
    x = (rng.integers(0, 2, size=(spec.n, spec.d)) * 2 - 1).astype(float)
    group1 = np.arange(spec.n) < math.ceil(spec.group1_fraction * spec.n)
    labels, majority = _label_tasks(x, spec.m, spec.q, group1, rng)
    if spec.holdout_tasks:
        holdout, _ = _label_tasks(x, spec.holdout_tasks, spec.q, group1, rng)
    else:
        holdout = np.zeros((spec.n, 0), dtype=np.int8)
    return SyntheticData(Panel(x, labels), holdout, group1, majority)


# ---------------------------------------------------------------------------
# CSV ingestion


@dataclass
class CrimeLoadReport:
    task_columns: list
    feature_columns: list
    imputed: dict = field(default_factory=dict)
    skipped_columns: list = field(default_factory=list)
    degenerate_tasks: list = field(default_factory=list)
    positive_fraction: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_table(path):
    """Rows of strings plus a header (synthesized if the file has none)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [[c.strip() for c in row] for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path} is empty")
    first = rows[0]
    probe = rows[1] if len(rows) > 1 else [""] * len(first)
    # a header row has text where the data below it is numeric; a text
    # column such as a community name is text in every row
    has_header = any(c not in MISSING and not _is_number(c)
                     and (len(rows) == 1 or (k < len(probe) and _is_number(probe[k])))
                     for k, c in enumerate(first))
    if has_header:
        header, body = first, rows[1:]
    else:
        header, body = [f"col{k}" for k in range(len(first))], rows
    width = len(header)
    for r, row in enumerate(body):
        if len(row) != width:
            raise DataError(f"row {r + 1} has {len(row)} fields, expected {width}")
    return header, body


def load_crime_csv(path, n: int = 200, m: int = 50, d: int = 20, binarize: str = "median",
                   skip_leading: int = 5):
    """Build a panel from the first n rows of a CSV.

    The first ``skip_leading`` columns are identifiers (state, county,
    community, name, fold in the UCI file) and are ignored, as is any column
    that is not numeric. Of the remaining columns, the first m become tasks
    (1 iff value > column median over the n rows) and the next d become
    real-valued features. Missing entries ('' or '?') take the column median;
    a column with no values in the selected rows is unusable and skipped.

    Returns ``(panel, report)``.
    """
    if binarize != "median":
        raise DataError(f"unknown binarization policy {binarize!r}")
    header, body = read_table(path)
    if len(body) < n:
        raise DataError(f"need {n} rows, file has {len(body)}")
    rows = body[:n]
    report = CrimeLoadReport([], [])
    usable = []
    for k in range(skip_leading, len(header)):
        col = [row[k] for row in rows]
        present = [c for c in col if c not in MISSING]
        if not present:
            report.skipped_columns.append(header[k])
            continue
        if not all(_is_number(c) for c in present):
            report.skipped_columns.append(header[k])
            continue
        vals = np.array([float(c) if c not in MISSING else np.nan for c in col])
        missing = int(np.isnan(vals).sum())
        if missing:
            vals[np.isnan(vals)] = np.median(vals[~np.isnan(vals)])
        usable.append((header[k], vals, missing))
        if len(usable) == m + d:
            break
    if len(usable) < m + d:
        raise DataError(f"need {m + d} usable numeric columns, found {len(usable)}")

    labels = np.empty((n, m), dtype=np.int8)
    for j, (name, vals, missing) in enumerate(usable[:m]):
        labels[:, j] = vals > np.median(vals)
        report.task_columns.append(name)
        frac = float(labels[:, j].mean())
        report.positive_fraction[name] = frac
        if frac in (0.0, 1.0):
            report.degenerate_tasks.append(name)
        if missing:
            report.imputed[name] = missing
    feats = np.empty((n, d))
    for k, (name, vals, missing) in enumerate(usable[m:]):
        feats[:, k] = vals
        report.feature_columns.append(name)
        if missing:
            report.imputed[name] = missing
    panel = Panel(feats, labels, task_ids=tuple(report.task_columns))
    return panel, report


def load_label_csv(path, n: int) -> tuple:
    """Task label columns over n individuals. Returns (labels (n, k), task ids)."""
    header, body = read_table(path)
    if len(body) != n:
        raise ValueError(f"labels file has {len(body)} rows, model has {n} individuals")
    out = np.empty((n, len(header)), dtype=np.int8)
    for r, row in enumerate(body):
        for c, cell in enumerate(row):
            if cell not in ("0", "1"):
                raise DataError(f"row {r + 1}, column {c + 1} ({header[c]}): label {cell!r} is not 0 or 1")
            out[r, c] = int(cell)
    return out, tuple(header)
