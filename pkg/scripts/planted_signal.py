"""Train on the planted-signal table for several seeds and compare with both baselines.

    python scripts/planted_signal.py --seeds 0 1 2 --trees 500
"""

import argparse
import time

from depstrat.evaluation import evaluate, permutation_importance
from depstrat.forest import (
    ForestParams, baseline_balanced, baseline_stratified, split_dataset, stage_seed, train_forest,
)
from depstrat.synthetic import planted_features


def run(seed: int, n: int, trees: int, threads: int, importance: bool) -> dict:
    t0 = time.perf_counter()
    table = planted_features(n, seed=seed)
    sp = split_dataset(table.labels, seed)
    y_tr = [table.labels[i] for i in sp.train_indices]
    y_te = [table.labels[i] for i in sp.test_indices]
    m = train_forest(table.X[sp.train_indices], y_tr, ForestParams(n_trees=trees), seed, threads,
                     feature_names=table.feature_names)
    model = evaluate(m.predict_proba(table.X[sp.test_indices], threads), y_te)
    strat = evaluate(baseline_stratified(y_tr, len(y_te), stage_seed(seed, "baseline")), y_te)
    bal = evaluate(baseline_balanced(len(y_te)), y_te)
    row = {"seed": seed, "auc": model.macro_ovr_roc_auc, "f1": model.weighted_f1,
           "strat_auc": strat.macro_ovr_roc_auc, "bal_auc": bal.macro_ovr_roc_auc,
           "bal_f1": bal.weighted_f1, "seconds": time.perf_counter() - t0}
    if importance:
        rep = permutation_importance(m, table.X[sp.test_indices], y_te, stage_seed(seed, "importance"),
                                     threads=threads)
        row["top3"] = ",".join(rep.ranking()[:3])
    return row


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--trees", type=int, default=500)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--importance", action="store_true", help="also report the top-3 permutation importances")
    args = ap.parse_args()
    print("seed  model_auc  strat_auc  bal_auc  model_f1  bal_f1  margin  seconds" + ("  top3" if args.importance else ""))
    for seed in args.seeds:
        r = run(seed, args.n, args.trees, args.threads, args.importance)
        margin = r["auc"] - max(r["strat_auc"], r["bal_auc"])
        print(f"{seed:4d}  {r['auc']:9.3f}  {r['strat_auc']:9.3f}  {r['bal_auc']:7.3f}  {r['f1']:8.3f}  "
              f"{r['bal_f1']:6.3f}  {margin:6.3f}  {r['seconds']:7.1f}" + (f"  {r['top3']}" if args.importance else ""))


if __name__ == "__main__":
    main()
