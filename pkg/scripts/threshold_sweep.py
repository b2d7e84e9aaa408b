"""Class shares and model-vs-baseline scores across specialization thresholds.

Runs label -> features -> train -> evaluate once per threshold on an ingested
snapshot (eco.ndjson from `depstrat ingest` or a pipeline run).

    python scripts/threshold_sweep.py --in runs/synthetic/pipeline/eco.ndjson --out runs/sweep
"""

import argparse
import sys
from pathlib import Path

from depstrat.artifacts import read_json
from depstrat.cli import main as cli_main

THRESHOLDS = (0.5, 0.75, 0.9, 0.95)


def step(*argv) -> None:
    code = cli_main([str(a) for a in argv])
    if code:
        sys.exit(code)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--in", dest="inp", type=Path, required=True)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--trees", type=int, default=500)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("threshold  model_auc  best_baseline_auc  model_f1  stratified_f1  balanced_f1")
    for t in THRESHOLDS:
        d = args.out / f"t{int(t * 100)}"
        d.mkdir(parents=True, exist_ok=True)
        step("label", "--in", args.inp, "--threshold", t, "--out", d / "labels.csv")
        step("features", "--in", args.inp, "--labels", d / "labels.csv", "--seed", args.seed,
             "--out", d / "features.csv")
        step("train", "--features", d / "features.csv", "--seed", args.seed, "--trees", args.trees,
             "--threads", args.threads, "--out", d / "model.json")
        step("evaluate", "--model", d / "model.json", "--features", d / "features.csv",
             "--threads", args.threads, "--out", d / "report.json")
        rep = read_json(d / "report.json")
        m, b = rep["model"], rep["baselines"]
        best = max(b["stratified"]["macro_ovr_roc_auc"] or 0, b["balanced_only"]["macro_ovr_roc_auc"] or 0)
        print(f"{t:9.2f}  {m['macro_ovr_roc_auc']:9.3f}  {best:17.3f}  {m['weighted_f1']:8.3f}  "
              f"{b['stratified']['weighted_f1']:13.3f}  {b['balanced_only']['weighted_f1']:11.3f}")


if __name__ == "__main__":
    main()
