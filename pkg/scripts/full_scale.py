"""Run the pipeline on the libraries.io npm export and compare with the published figures.

    python scripts/full_scale.py --data /path/to/libraries-1.6.0-2020-01-12 --out runs/full --threads 8

The export is not shipped; the same check runs under pytest when
DEPSTRAT_NPM_DATA points at the export directory.
"""

import argparse
import sys
from pathlib import Path

from depstrat.artifacts import read_csv, read_json
from depstrat.cli import main as cli_main

REFERENCE_SHARES = {"balanced": 0.542, "restrictive": 0.067, "permissive": 0.293, "unspecialized": 0.098}
REFERENCE_F1 = {"balanced": 0.82, "permissive": 0.79, "restrictive": 0.45, "unspecialized": 0.39}


def export(data: Path, kind: str) -> str:
    hits = sorted(data.glob(f"{kind}*.csv"))
    if not hits:
        sys.exit(f"no {kind}*.csv under {data}")
    return str(hits[0])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path, required=True)
    ap.add_argument("--out", type=Path, default=Path("runs/full"))
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    code = cli_main(["pipeline", "--projects", export(args.data, "projects"),
                     "--versions", export(args.data, "versions"),
                     "--dependencies", export(args.data, "dependencies"),
                     "--snapshot", "2020-01-12", "--seed", str(args.seed),
                     "--threads", str(args.threads), "--out", str(args.out)])
    if code:
        return code
    labels = read_csv(args.out / "labels.csv", ("label",))
    print(f"{'class':14s} {'share':>7s} {'ref':>7s}")
    for c, ref in REFERENCE_SHARES.items():
        share = sum(r["label"] == c for r in labels) / len(labels)
        print(f"{c:14s} {share:7.3f} {ref:7.3f}")
    rep = read_json(args.out / "report.json")["model"]
    print(f"\nmacro ROC-AUC {rep['macro_ovr_roc_auc']:.3f} (ref 0.86), weighted F1 {rep['weighted_f1']:.3f} (ref 0.74)")
    for c, ref in REFERENCE_F1.items():
        print(f"  f1 {c:14s} {rep['per_class'][c]['f1']:.2f} (ref {ref:.2f})")
    imp = read_csv(args.out / "explain" / "importance.csv", ("feature", "mean"))
    top = sorted(imp, key=lambda r: -float(r["mean"]))[:3]
    print("\ntop-3 importances:", ", ".join(r["feature"] for r in top))
    return 0


if __name__ == "__main__":
    sys.exit(main())
