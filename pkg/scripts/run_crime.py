"""Communities-and-Crime experiment on a user-supplied CSV.

The UCI file is not bundled. Download ``communities.data`` (no header row)
and pass its path; the first five columns are identifiers and are skipped.

    python scripts/run_crime.py path/to/communities.data [--output runs/crime]
"""
import argparse
import json
import tempfile
from pathlib import Path

from aiflearn.cli import cmd_baseline, cmd_train

CONFIG = Path(__file__).parent.parent / "configs" / "crime.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("csv")
    ap.add_argument("--output", default="runs/crime")
    args = ap.parse_args()
    cfg = json.loads(CONFIG.read_text())
    cfg["data"]["csv"]["path"] = str(Path(args.csv).resolve())
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
    cmd_train(fh.name, args.output)
    cmd_baseline(fh.name, args.output)
    for alpha in cfg["alphas"]:
        report = json.loads((Path(args.output) / f"alpha_{alpha}" / "report.json").read_text())
        rep = report["report"]
        print(f"alpha={alpha}: error {rep['overall_error']:.4f} spread {rep['spread']:.4f}")
    Path(fh.name).unlink()


if __name__ == "__main__":
    main()
