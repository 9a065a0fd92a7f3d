"""Command-line harness: ``aif-learn {train,baseline,apply}``.

Config files are JSON::

    {
      "data": {"synthetic": {"n": 200, "m": 50, "d": 20, "q": 0.8, "seed": 0}},
      "variant": "aif",                 # or "fpaif"
      "alphas": [0.025, 0.05, 0.1],
      "nu": 0.2,
      "overrides": {"T": 1000, "eta": 0.01},
      "oracle": "regression",           # or "exact"
      "seed": 0,
      "omegas": [0.0, 0.1, ..., 1.0],   # baseline grid
      "output": "runs/synthetic"
    }

``data`` may instead be ``{"csv": {"path": ..., "n": 200, "m": 50, "d": 20,
"binarize": "median", "skip_leading": 5, "rho_tasks": 10}}``.

Exit codes: 0 success, 2 invalid config or shape mismatch, 3 data error,
4 non-finite numbers.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import AIF, FPAIF, PsiHat, derive_hyperparams
from .data import DataError, SyntheticSpec, generate_synthetic, load_crime_csv, load_label_csv
from .dynamics import error_rates
from .learn import NumericError, apply_psi_hat, rho_tilde_from_holdout, train_aif, train_fpaif
from .metrics import DEFAULT_OMEGAS, mixture_baseline, report_from_proba
from .oracle import ExactOracle, RegressionOracle, make_oracle

log = logging.getLogger("aiflearn")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
MODEL_FORMAT = "aiflearn.psi_hat"
MODEL_VERSION = 1
TRAJECTORY_COLUMNS = ("round", "overall_error", "max_violation", "gamma_t", "lambda_l1")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    data: dict
    variant: str = AIF
    alphas: list = field(default_factory=lambda: [0.1])
    nu: float = 0.2
    overrides: dict = field(default_factory=dict)
    oracle: str = "regression"
    seed: int = 0
    omegas: list = field(default_factory=lambda: list(DEFAULT_OMEGAS))
    output: str = "runs"

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "data" not in raw:
            raise ConfigError("config needs a 'data' section")
        cfg = cls(**raw)
        cfg.variant = str(cfg.variant).upper()
        if cfg.variant not in (AIF, FPAIF):
            raise ConfigError(f"variant must be aif or fpaif, got {raw.get('variant')!r}")
        if cfg.oracle not in ("regression", "exact"):
            raise ConfigError(f"oracle must be regression or exact, got {cfg.oracle!r}")
        if not isinstance(cfg.alphas, list) or not cfg.alphas:
            raise ConfigError("alphas must be a nonempty list")
        if not isinstance(cfg.data, dict) or len(cfg.data) != 1 or \
                next(iter(cfg.data)) not in ("synthetic", "csv"):
            raise ConfigError("data must be {'synthetic': {...}} or {'csv': {...}}")
        try:
            for a in cfg.alphas:
                derive_hyperparams(float(a), float(cfg.nu), 1, 1, dict(cfg.overrides, T=1))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# output helpers


def fmt(v) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not np.isfinite(v):
        raise NumericError(f"non-finite value {v!r} in output")
    return repr(v)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    _atomic_write(path, buf.getvalue())


def _check_finite_json(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        raise NumericError("non-finite value in JSON output")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite_json(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite_json(v)


def write_json(path: Path, obj):
    _check_finite_json(obj)
    _atomic_write(path, json.dumps(obj, indent=1, allow_nan=False) + "\n")


def save_model(path: Path, psi: PsiHat, individual_ids=()):
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "variant": psi.variant,
        "oracle": psi.oracle_spec,
        "features": psi.features.tolist(),
        "weight_archive": psi.weight_archive.tolist(),
        "rho_tilde": None if psi.rho_tilde is None else psi.rho_tilde.tolist(),
        "individual_ids": list(individual_ids),
        "metadata": psi.metadata,
    }
    write_json(path, obj)


def load_model(path) -> tuple:
    """Returns (PsiHat, individual ids)."""
    obj = json.loads(Path(path).read_text())
    if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
        raise ConfigError(f"{path} is not a version-{MODEL_VERSION} model file")
    psi = PsiHat(np.array(obj["features"], float), np.array(obj["weight_archive"], float),
                 obj["oracle"], obj["variant"],
                 None if obj["rho_tilde"] is None else np.array(obj["rho_tilde"], float),
                 metadata=obj.get("metadata", {}))
    ids = tuple(obj.get("individual_ids") or (str(i) for i in range(psi.n)))
    return psi, ids


# ---------------------------------------------------------------------------
# data


def build_data(cfg: RunConfig):
    """(panel, rho-tilde holdout labels or None, data manifest)."""
    kind, spec = next(iter(cfg.data.items()))
    spec = dict(spec)
    if kind == "synthetic":
        spec.setdefault("seed", cfg.seed)
        if cfg.variant == FPAIF:
            spec.setdefault("holdout_tasks", spec.get("m", SyntheticSpec.m))
        try:
            sspec = SyntheticSpec(**spec)
        except (TypeError, DataError) as exc:
            raise ConfigError(f"bad synthetic spec: {exc}") from exc
        data = generate_synthetic(sspec)
        holdout = data.holdout_labels if sspec.holdout_tasks else None
        return data.panel, holdout, {"synthetic": sspec.__dict__}
    rho_tasks = int(spec.pop("rho_tasks", 10)) if cfg.variant == FPAIF else 0
    path = spec.pop("path", None)
    if path is None:
        raise ConfigError("csv data needs a 'path'")
    m = int(spec.pop("m", 50))
    try:
        panel, report = load_crime_csv(path, m=m + rho_tasks, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad csv spec: {exc}") from exc
    holdout = None
    if rho_tasks:
        holdout = np.asarray(panel.labels[:, :rho_tasks])
        panel = panel.select_tasks(range(rho_tasks, panel.m))
    return panel, holdout, {"csv": dict(path=str(path), m=m, rho_tasks=rho_tasks, **spec),
                            "columns": report.to_dict()}


def build_oracle(name: str, features):
    return RegressionOracle(features) if name == "regression" else ExactOracle(features)


def alpha_dir(out: Path, alpha: float) -> Path:
    return out / f"alpha_{fmt(alpha)}"


# ---------------------------------------------------------------------------
# commands


def _run_one(cfg: RunConfig, panel, holdout, alpha: float, data_manifest: dict, out: Path):
    t0 = time.perf_counter()
    hp = derive_hyperparams(float(alpha), float(cfg.nu), panel.n, panel.m,
                            dict(cfg.overrides, seed=cfg.seed))
    oracle = build_oracle(cfg.oracle, panel.features)
    if cfg.variant == AIF:
        result = train_aif(panel, hp, oracle)
    else:
        if holdout is None:
            raise ConfigError("fpaif needs held-out tasks for rho estimates")
        rho = rho_tilde_from_holdout(holdout)
        result = train_fpaif(panel, hp, oracle, rho)
    report = report_from_proba(result.proba, panel.labels, result.gamma_hat, cfg.variant)

    d = alpha_dir(out, alpha)
    write_csv(d / "trajectory.csv", TRAJECTORY_COLUMNS,
              ([getattr(rec, c) for c in TRAJECTORY_COLUMNS] for rec in result.trajectory))
    save_model(d / "model.json", result.psi_hat, panel.individual_ids)
    manifest = dict(result.manifest)
    manifest.pop("batch_schedule", None)
    manifest.update(config=cfg.__dict__, data=data_manifest,
                    batch_schedule=result.manifest["batch_schedule"],
                    timing_seconds=time.perf_counter() - t0)
    write_json(d / "report.json", {"alpha": alpha, "report": report.to_dict(), "manifest": manifest})
    log.info("alpha=%s: overall error %.4f, spread %.4f, max deviation %.4f",
             alpha, report.overall_error, report.spread, report.max_abs_deviation)
    return alpha, report


def cmd_train(config_path, output=None, seed=None, threads=None) -> int:
    cfg = load_config(config_path)
    if seed is not None:
        cfg.seed = int(seed)
    out = Path(output or cfg.output)
    panel, holdout, data_manifest = build_data(cfg)
    workers = max(1, threads or os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda a: _run_one(cfg, panel, holdout, a, data_manifest, out),
                                cfg.alphas))
    rows = []
    for alpha, report in results:
        for iid, rate in zip(panel.individual_ids, report.individual_rates):
            rows.append((fmt(alpha), iid, rate, report.gamma_hat))
    write_csv(out / "spread.csv", ("alpha", "individual_id", "individual_error", "gamma_hat"), rows)
    return EXIT_OK


def cmd_baseline(config_path, output=None, seed=None, threads=None) -> int:
    cfg = load_config(config_path)
    if seed is not None:
        cfg.seed = int(seed)
    out = Path(output or cfg.output)
    panel, _, data_manifest = build_data(cfg)
    curve = mixture_baseline(panel, build_oracle(cfg.oracle, panel.features), cfg.omegas)
    rows = []
    for k, omega in enumerate(curve.mixture_weights):
        for iid, rate in zip(panel.individual_ids, curve.individual_rates[k]):
            rows.append((omega, iid, rate, curve.overall_errors[k]))
    write_csv(out / "baseline.csv", ("omega", "individual_id", "individual_error", "overall_error"), rows)
    write_json(out / "baseline.json", {"config": cfg.__dict__, "data": data_manifest,
                                       "spreads": curve.spreads.tolist(),
                                       "overall_errors": curve.overall_errors.tolist()})
    return EXIT_OK


def cmd_apply(model_path, labels_path, output=None) -> int:
    """Map new task columns through a saved model; write per-task rates and a holdout report."""
    try:
        psi, ids = load_model(model_path)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot read model {model_path}: {exc}") from exc
    labels, task_ids = load_label_csv(labels_path, psi.n)
    out = Path(output or Path(model_path).parent / "apply")
    oracle = make_oracle(psi.oracle_spec, psi.features)
    proba = np.column_stack([apply_psi_hat(psi, labels[:, j], oracle).predict_proba(psi.features)
                             for j in range(labels.shape[1])])
    per_task = (proba * (1.0 - labels) + (1.0 - proba) * labels)
    rows = [(tid, iid, per_task[i, j]) for j, tid in enumerate(task_ids) for i, iid in enumerate(ids)]
    write_csv(out / "apply_rates.csv", ("task_id", "individual_id", "individual_error"), rows)
    gamma_hat = float(psi.metadata.get("gamma_hat", 0.0))
    report = report_from_proba(proba, labels, gamma_hat, psi.variant)
    write_json(out / "holdout_report.json", {
        "tasks": list(task_ids),
        "alpha": psi.metadata.get("alpha"),
        "report": report.to_dict(),
        "individual_error": error_rates(proba, labels).tolist(),
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aif-learn", description="Train and apply fair multi-task classifiers.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("train", "baseline"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--output")
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    s = sub.add_parser("apply")
    s.add_argument("--model", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--output")
    s.add_argument("--threads", type=int)
    return p


def main(argv=None) -> int:
    level = os.environ.get("AIF_LOG", "warning").upper()
    logging.basicConfig(level=level if level in ("ERROR", "INFO", "DEBUG") else "WARNING",
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args.config, args.output, args.seed, args.threads)
        if args.command == "baseline":
            return cmd_baseline(args.config, args.output, args.seed, args.threads)
        return cmd_apply(args.model, args.labels, args.output)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
