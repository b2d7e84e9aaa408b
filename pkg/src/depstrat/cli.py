"""``depstrat`` command line: one subcommand per pipeline stage, plus ``pipeline`` and ``recommend``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .artifacts import (
    RunConfig, atomic_write_text, provenance, read_csv, read_json, write_csv, write_json,
)
from .evaluation import evaluate, partial_dependence, permutation_importance
from .evolution import detect_shifts, evolution_series, parse_month, sample_packages
from .features import (
    CATEGORICAL_FEATURES, FEATURE_NAMES, TOP_FEATURES, correlation_audit,
    derive_features, fit_domain_model,
)
from .forest import (
    CLASS_ORDER, ForestModel, ForestParams, baseline_balanced, baseline_stratified, predict,
    predictions_to_matrix, split_dataset, stage_seed, train_forest,
)
from .graph import DepGraph, build_graph, graph_metrics
from .ingest import (
    DEFAULT_SPAM_PATTERNS, RUNTIME, EcosystemSnapshot, InputError, SchemaMismatch, UnknownPackage,
    apply_filters, dumps_snapshot, impute_missing, load_denylist, load_librariesio, read_snapshot,
)
from .labeling import DEFAULT_SWEEP, SpecializationLabel, label_all, labels_to_rows, threshold_sweep
from .semver import ConstraintError, admission_profile, classify, parse_range, render, spans_release_boundary

log = logging.getLogger("depstrat")

GRAPH_COLUMNS = ("package", "dependent_count", "transitive_dependents", "dependency_count",
                 "transitive_dependencies")
LABEL_COLUMNS = ("package", "label", "agreement", "n_dependents", "n_excluded")
SWEEP_COLUMNS = ("threshold", "n_packages", "balanced", "restrictive", "permissive", "unspecialized")
FEATURE_COLUMNS = ("package",) + FEATURE_NAMES + ("label",)
EVOLUTION_COLUMNS = ("month", "balanced", "restrictive", "permissive", "marker_1_0_0")
IMPORTANCE_COLUMNS = ("feature", "mean", "std", "min", "q1", "median", "q3", "max")


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(str(cause))
        self.stage = stage
        self.cause = cause


class _Stage:
    """Context manager tagging any exception with the stage that raised it."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, et, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


# ---------------------------------------------------------------- stage bodies


def do_ingest(projects: str, versions: str, dependencies: str, snapshot: date, out: Path,
              prov: dict, denylist: Optional[str] = None, raw_out: Optional[Path] = None,
              report_out: Optional[Path] = None) -> EcosystemSnapshot:
    report: dict = {}
    s = load_librariesio(Path(projects), Path(versions), Path(dependencies), snapshot, report=report)
    s = impute_missing(s, report)
    if raw_out is not None:
        atomic_write_text(raw_out, dumps_snapshot(s, prov))
    patterns = DEFAULT_SPAM_PATTERNS + (load_denylist(Path(denylist)) if denylist else ())
    s = apply_filters(s, patterns, report)
    report["result"] = {"packages": len(s.packages), "edges": len(s.edges),
                        "labeled_population": len(s.labeled_population())}
    atomic_write_text(out, dumps_snapshot(s, prov))
    write_json(report_out or out.with_name("ingest-report.json"), report, prov)
    return s


def runtime_graph(s: EcosystemSnapshot) -> DepGraph:
    """Graph over latest runtime edges only, for snapshots that were not filtered."""
    edges = [(e.dependent, e.target) for e in s.latest_edges if e.kind == RUNTIME]
    return DepGraph.from_edges(s.packages, edges)


def do_graph(s: EcosystemSnapshot, out: Path, prov: dict, raw: Optional[EcosystemSnapshot] = None) -> DepGraph:
    g = runtime_graph(raw) if raw is not None else build_graph(s)
    write_csv(out, GRAPH_COLUMNS, graph_metrics(g), prov)
    return g


def do_label(s: EcosystemSnapshot, threshold: float, out: Path, prov: dict,
             sweep_out: Optional[Path] = None,
             sweep: Sequence[float] = DEFAULT_SWEEP) -> dict[str, SpecializationLabel]:
    labels = label_all(s, threshold)
    write_csv(out, LABEL_COLUMNS, labels_to_rows(labels), prov)
    if sweep_out is not None:
        write_csv(sweep_out, SWEEP_COLUMNS, threshold_sweep(labels, sweep), prov)
    return labels


def do_features(s: EcosystemSnapshot, g: DepGraph, labels: dict[str, str], seed: int, out: Path,
                prov: dict, domain_out: Optional[Path] = None,
                audit_out: Optional[Path] = None) -> tuple[list[str], np.ndarray, list[str]]:
    unknown = sorted(set(labels) - set(s.packages))
    if unknown:
        raise UnknownPackage(f"labeled packages missing from snapshot: {unknown[:5]}")
    dm = fit_domain_model(s, stage_seed(seed, "domain"))
    names = sorted(labels)
    vecs = derive_features(s, g, dm, names=names)
    rows = [[n, *vecs[n].as_row(), labels[n]] for n in names]
    write_csv(out, FEATURE_COLUMNS, rows, prov)
    write_json(domain_out or out.with_name("domain-model.json"), dm.to_json(), prov)
    X = np.array([vecs[n].as_row() for n in names], dtype=float).reshape(len(names), len(FEATURE_NAMES))
    if audit_out is not None:
        write_json(audit_out, correlation_audit(X, FEATURE_NAMES) if len(names) > 1 else {}, prov)
    return names, X, [labels[n] for n in names]


def load_features(path: Path) -> tuple[list[str], np.ndarray, list[str]]:
    rows = read_csv(path, FEATURE_COLUMNS)
    try:
        X = np.array([[float(r[c]) for c in FEATURE_NAMES] for r in rows], dtype=float)
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: non-numeric feature value ({exc})") from exc
    return [r["package"] for r in rows], X.reshape(len(rows), len(FEATURE_NAMES)), [r["label"] for r in rows]


def do_train(names: list[str], X: np.ndarray, y: list[str], seed: int, params: ForestParams,
             stratify: bool, out: Path, prov: dict, threads: int = 1) -> ForestModel:
    split = split_dataset(y, stage_seed(seed, "split"), 0.2, stratify)
    tr = split.train_indices
    m = train_forest(X[tr], [y[i] for i in tr], params, stage_seed(seed, "forest"), threads,
                     CLASS_ORDER, FEATURE_NAMES)
    m.metadata = {
        "provenance": prov,
        "master_seed": seed,
        "stratified": stratify,
        "n_train": int(len(tr)),
        "n_test": int(len(split.test_indices)),
        "test_packages": [names[i] for i in split.test_indices],
    }
    atomic_write_text(out, m.dumps() + "\n")
    return m


def load_model(path: Path) -> ForestModel:
    try:
        return ForestModel.from_json(read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"{path}: malformed model ({exc})") from exc


def held_out(m: ForestModel, names: list[str], X: np.ndarray, y: list[str],
             all_rows: bool = False) -> tuple[np.ndarray, list[str]]:
    if all_rows:
        return X, y
    pos = {n: i for i, n in enumerate(names)}
    test = m.metadata.get("test_packages")
    if test is None:
        raise SchemaMismatch("model carries no held-out package list")
    missing = [n for n in test if n not in pos]
    if missing:
        raise UnknownPackage(f"held-out packages missing from features: {missing[:5]}")
    idx = [pos[n] for n in test]
    return X[idx], [y[i] for i in idx]


def _summary(rep) -> dict:
    return {"macro_ovr_roc_auc": rep.macro_ovr_roc_auc, "weighted_f1": rep.weighted_f1}


def do_evaluate(m: ForestModel, names: list[str], X: np.ndarray, y: list[str], out: Path,
                prov: dict, threads: int = 1) -> dict:
    Xt, yt = held_out(m, names, X, y)
    test_set = set(m.metadata.get("test_packages", ()))
    y_train = [lab for n, lab in zip(names, y) if n not in test_set]
    seed = m.metadata.get("master_seed", m.seed)
    model_rep = evaluate(m.predict_proba(Xt, threads), yt, m.class_order)
    strat_rep = evaluate(predictions_to_matrix(
        baseline_stratified(y_train, len(yt), stage_seed(seed, "baseline"), m.class_order)), yt, m.class_order)
    bal_rep = evaluate(predictions_to_matrix(baseline_balanced(len(yt), m.class_order)), yt, m.class_order)
    best = {k: max(v for v in (_summary(strat_rep)[k], _summary(bal_rep)[k]) if v is not None)
            for k in ("macro_ovr_roc_auc", "weighted_f1")}
    model_sum = _summary(model_rep)
    report = {
        "n_test": len(yt),
        "model": model_rep.to_json(),
        "baselines": {"stratified": strat_rep.to_json(), "balanced_only": bal_rep.to_json()},
        "comparison": {
            "model": model_sum,
            "stratified": _summary(strat_rep),
            "balanced_only": _summary(bal_rep),
            "increase_over_best_baseline": {
                k: (model_sum[k] - best[k]) if model_sum[k] is not None else None for k in best},
        },
    }
    write_json(out, report, prov)
    return report


def _pdp_features(spec: str, ranking: Optional[list[str]]) -> list[str]:
    if spec == "all":
        return list(FEATURE_NAMES)
    if spec == "top3":
        return ranking[:3] if ranking else list(TOP_FEATURES)
    chosen = [f.strip() for f in spec.split(",") if f.strip()]
    bad = [f for f in chosen if f not in FEATURE_NAMES]
    if bad:
        raise InputError(f"unknown feature(s) {bad}")
    return chosen


def _classes(spec: str, class_order: Sequence[str]) -> list[str]:
    if spec == "all":
        return list(class_order)
    chosen = [c.strip() for c in spec.split(",") if c.strip()]
    bad = [c for c in chosen if c not in class_order]
    if bad:
        raise InputError(f"unknown class(es) {bad}")
    return chosen


def do_explain(m: ForestModel, names: list[str], X: np.ndarray, y: list[str], out_dir: Path,
               prov: dict, importance: bool = True, pdp: bool = True, classes: str = "all",
               pdp_features: str = "top3", threads: int = 1) -> dict:
    seed = m.metadata.get("master_seed", m.seed)
    ranking = None
    result: dict = {}
    if importance:
        Xt, yt = held_out(m, names, X, y)
        imp = permutation_importance(m, Xt, yt, stage_seed(seed, "importance"), threads=threads)
        reps = [f"rep_{r + 1}" for r in range(imp.drops.shape[1])]
        rows = [[s[c] for c in IMPORTANCE_COLUMNS] + d.tolist() for s, d in zip(imp.summary(), imp.drops)]
        write_csv(out_dir / "importance.csv", IMPORTANCE_COLUMNS + tuple(reps), rows, prov)
        ranking = imp.ranking()
        result["ranking"] = ranking
    if pdp:
        cls = _classes(classes, m.class_order)
        feats = _pdp_features(pdp_features, ranking)
        deciles = []
        for f in feats:
            j = FEATURE_NAMES.index(f)
            grid = partial_dependence(m, X, j, cls, f in CATEGORICAL_FEATURES,
                                      seed=stage_seed(seed, "pdp"), threads=threads)
            for c in cls:
                write_csv(out_dir / f"pdp_{c}_{f}.csv", ("grid_value", "mean_probability"), grid.rows(c), prov)
            deciles.append([f] + grid.deciles.tolist())
        write_csv(out_dir / "pdp_deciles.csv", ("feature",) + tuple(f"d{i}" for i in range(1, 10)), deciles, prov)
        result["pdp_features"] = feats
    return result


def recommend(m: ForestModel, x: Sequence[float], package: Optional[str] = None) -> dict:
    if len(x) != len(FEATURE_NAMES):
        raise SchemaMismatch(f"expected {len(FEATURE_NAMES)} feature values, got {len(x)}")
    p = predict(m, x)
    return {
        "package": package,
        "recommended_strategy": p.predicted,
        "probabilities": dict(zip(m.class_order, p.class_probabilities)),
        "context": {f: x[FEATURE_NAMES.index(f)] for f in TOP_FEATURES},
    }


def inline_features(text: str) -> list[float]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"inline features are not valid JSON ({exc})") from exc
    if isinstance(obj, dict):
        missing = [f for f in FEATURE_NAMES if f not in obj]
        extra = [k for k in obj if k not in FEATURE_NAMES]
        if missing or extra:
            raise SchemaMismatch(f"inline features: missing {missing}, unexpected {extra}")
        obj = [obj[f] for f in FEATURE_NAMES]
    if not isinstance(obj, list) or len(obj) != len(FEATURE_NAMES):
        raise SchemaMismatch(f"inline features must hold {len(FEATURE_NAMES)} values")
    try:
        return [float(v) for v in obj]
    except (TypeError, ValueError) as exc:
        raise SchemaMismatch(f"inline features: {exc}") from exc


def classify_report(text: str) -> dict:
    c = parse_range(text)
    prof = admission_profile(c)
    return {
        "range": text,
        "normalized": render(c),
        "intervals": [[str(lo), li, None if hi is None else str(hi), hi_inc]
                      for lo, li, hi, hi_inc in c.as_bounds()],
        "prerelease_intervals": [[str(iv.lower), iv.lower_inclusive, str(iv.upper), iv.upper_inclusive]
                                 for iv in c.prerelease_intervals],
        "min_version": str(c.min_version()),
        "profile": {"pinned": prof.pinned, "admits_patch": prof.admits_patch,
                    "admits_minor": prof.admits_minor, "admits_major": prof.admits_major},
        "strategy": classify(c).value,
        "spans_1_0_0": spans_release_boundary(c),
    }


# ---------------------------------------------------------------- pipeline


def run_pipeline(cfg: RunConfig) -> dict:
    out = Path(cfg.out_dir)
    prov = {**provenance(cfg.semantic(), cfg.seed), "config": cfg.semantic()}
    with _Stage("config"):
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "config.json", cfg.semantic(), provenance(cfg.semantic(), cfg.seed))
    with _Stage("ingest"):
        s = do_ingest(cfg.projects, cfg.versions, cfg.dependencies, cfg.snapshot_date,
                      out / "eco.ndjson", prov, cfg.denylist)
    with _Stage("graph"):
        g = do_graph(s, out / "graph-metrics.csv", prov)
    with _Stage("label"):
        labels = do_label(s, cfg.threshold, out / "labels.csv", prov, out / "threshold-sweep.csv")
    with _Stage("features"):
        names, X, y = do_features(s, g, {n: lab.value for n, lab in labels.items()}, cfg.seed,
                                  out / "features.csv", prov, audit_out=out / "correlations.json")
    with _Stage("train"):
        m = do_train(names, X, y, cfg.seed, ForestParams(cfg.n_trees, cfg.min_samples_split),
                     cfg.stratify, out / "model.json", prov, cfg.threads)
    with _Stage("evaluate"):
        report = do_evaluate(m, names, X, y, out / "report.json", prov, cfg.threads)
    with _Stage("explain"):
        explained = do_explain(m, names, X, y, out / "explain", prov, pdp_features=cfg.pdp_features,
                               threads=cfg.threads)
    return {"comparison": report["comparison"], **explained}


# ---------------------------------------------------------------- argument parsing


def _date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _month(text: str) -> str:
    try:
        parse_month(text)
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected YYYY-MM, got {text!r}") from None
    return text


def _fraction(text: str) -> float:
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError("threshold must be in [0, 1)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _env_threads() -> int:
    raw = os.environ.get("DEPSTRAT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive, default=None,
                        help="worker threads (default: $DEPSTRAT_THREADS or 1); never changes results")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="depstrat", description="Dependency update strategy analysis for npm.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, description=help, parents=[common])

    def ingest_inputs(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--projects", required=True, help="libraries.io projects CSV")
        sp.add_argument("--versions", required=True, help="libraries.io versions CSV")
        sp.add_argument("--dependencies", required=True, help="libraries.io dependencies CSV")
        sp.add_argument("--snapshot", required=True, type=_date, help="snapshot date YYYY-MM-DD")
        sp.add_argument("--denylist", help="extra spam name patterns, one regex per line")

    sp = cmd("ingest", "Load CSV exports, filter and impute, write a normalized snapshot.")
    ingest_inputs(sp)
    sp.add_argument("--out", required=True, type=Path, help="normalized snapshot (NDJSON)")
    sp.add_argument("--report", type=Path, help="ingest report path (default: ingest-report.json next to --out)")
    sp.add_argument("--raw-out", type=Path, help="also write the snapshot before spam/edge filters")

    sp = cmd("graph", "Direct and transitive dependent/dependency counts.")
    sp.add_argument("--in", dest="inp", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--pre-filter-graph", type=Path, metavar="RAW",
                    help="count over this unfiltered snapshot (see ingest --raw-out)")

    sp = cmd("label", "Specialization label per package from its dependents' strategies.")
    sp.add_argument("--in", dest="inp", required=True, type=Path)
    sp.add_argument("--threshold", type=_fraction, default=0.5)
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--sweep", type=Path, help="also write class shares per threshold")
    sp.add_argument("--sweep-thresholds", default=",".join(str(t) for t in DEFAULT_SWEEP))

    sp = cmd("features", "Feature table for labeled packages.")
    sp.add_argument("--in", dest="inp", required=True, type=Path)
    sp.add_argument("--labels", required=True, type=Path)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--domain-model", type=Path, help="default: domain-model.json next to --out")
    sp.add_argument("--audit-correlations", nargs="?", const=True, default=None, metavar="PATH",
                    help="write a correlation audit (default path: correlations.json next to --out)")
    sp.add_argument("--pre-filter-graph", type=Path, metavar="RAW")

    sp = cmd("train", "Train the random forest on an 80/20 split.")
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--trees", type=_positive, default=500)
    sp.add_argument("--min-split", type=_positive, default=8)
    sp.add_argument("--max-features", type=_positive, default=None)
    sp.add_argument("--no-stratify", action="store_true", help="plain random split")
    sp.add_argument("--out", required=True, type=Path)

    sp = cmd("evaluate", "Held-out metrics for the model and both baselines.")
    sp.add_argument("--model", required=True, type=Path)
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)

    sp = cmd("explain", "Permutation importance and partial dependence.")
    sp.add_argument("--model", required=True, type=Path)
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--importance", action="store_true")
    sp.add_argument("--pdp", action="store_true")
    sp.add_argument("--classes", default="all", help="'all' or a comma list")
    sp.add_argument("--pdp-features", default="top3", help="'top3', 'all' or a comma list")
    sp.add_argument("--out", required=True, type=Path, help="output directory")

    sp = cmd("evolve", "Monthly strategy tallies of one package's dependents.")
    sp.add_argument("--in", dest="inp", required=True, type=Path)
    sp.add_argument("--package", required=True)
    sp.add_argument("--from", dest="start", required=True, type=_month)
    sp.add_argument("--to", dest="end", required=True, type=_month)
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--detect-shifts", action="store_true", help="also write shifts.json")
    sp.add_argument("--persistence", type=_positive, default=3)

    sp = cmd("sample", "Seeded per-class sample of labeled packages within a dependent-count band.")
    sp.add_argument("--labels", required=True, type=Path)
    sp.add_argument("--per-class", type=_positive, default=40)
    sp.add_argument("--min-dependents", type=int, default=0)
    sp.add_argument("--max-dependents", type=int, default=None)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True, type=Path)

    sp = cmd("recommend", "Predict the strategy a package's dependents should use.")
    sp.add_argument("--model", required=True, type=Path)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--package")
    src.add_argument("--inline", metavar="JSON", help="feature values as an object or a 19-item list")
    sp.add_argument("--features", type=Path, help="features CSV (with --package)")

    sp = cmd("classify", "Normalize one range and print its update strategy.")
    sp.add_argument("range")

    sp = cmd("pipeline", "ingest, graph, label, features, train, evaluate and explain in one run.")
    ingest_inputs(sp)
    sp.add_argument("--out", required=True, type=Path, help="output directory")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--threshold", type=_fraction, default=0.5)
    sp.add_argument("--trees", type=_positive, default=500)
    sp.add_argument("--min-split", type=_positive, default=8)
    sp.add_argument("--no-stratify", action="store_true")
    sp.add_argument("--pdp-features", default="top3")
    return p


def _cmd_prov(args: argparse.Namespace, seed: Optional[int] = None) -> dict:
    skip = {"threads", "verbose", "out", "func"}
    cfg = {k: (str(v) if isinstance(v, (Path, date)) else v) for k, v in vars(args).items() if k not in skip}
    return provenance(cfg, seed)


def _print(obj: dict) -> None:
    print(json.dumps(obj, indent=2, default=str))


def dispatch(args: argparse.Namespace) -> int:
    threads = args.threads or _env_threads()
    c = args.command
    if c == "classify":
        with _Stage("classify"):
            _print(classify_report(args.range))
        return 0
    if c == "pipeline":
        cfg = RunConfig(args.snapshot, args.threshold, args.seed, args.trees, args.min_split,
                        not args.no_stratify, args.projects, args.versions, args.dependencies,
                        str(args.out), threads, args.denylist, args.pdp_features)
        _print(run_pipeline(cfg))
        return 0

    with _Stage(c):
        if c == "ingest":
            do_ingest(args.projects, args.versions, args.dependencies, args.snapshot, args.out,
                      _cmd_prov(args), args.denylist, args.raw_out, args.report)
        elif c == "graph":
            raw = read_snapshot(args.pre_filter_graph) if args.pre_filter_graph else None
            do_graph(read_snapshot(args.inp), args.out, _cmd_prov(args), raw)
        elif c == "label":
            sweep = [float(t) for t in args.sweep_thresholds.split(",") if t.strip()]
            do_label(read_snapshot(args.inp), args.threshold, args.out, _cmd_prov(args), args.sweep, sweep)
        elif c == "features":
            s = read_snapshot(args.inp)
            g = runtime_graph(read_snapshot(args.pre_filter_graph)) if args.pre_filter_graph else build_graph(s)
            labels = {r["package"]: r["label"] for r in read_csv(args.labels, ("package", "label"))}
            audit = args.audit_correlations
            audit_out = args.out.with_name("correlations.json") if audit is True else (Path(audit) if audit else None)
            do_features(s, g, labels, args.seed, args.out, _cmd_prov(args, args.seed),
                        args.domain_model, audit_out)
        elif c == "train":
            names, X, y = load_features(args.features)
            params = ForestParams(args.trees, args.min_split, args.max_features)
            do_train(names, X, y, args.seed, params, not args.no_stratify, args.out,
                     _cmd_prov(args, args.seed), threads)
        elif c == "evaluate":
            m = load_model(args.model)
            names, X, y = load_features(args.features)
            rep = do_evaluate(m, names, X, y, args.out, _cmd_prov(args, m.metadata.get("master_seed")), threads)
            _print(rep["comparison"])
        elif c == "explain":
            m = load_model(args.model)
            names, X, y = load_features(args.features)
            both = not (args.importance or args.pdp)
            res = do_explain(m, names, X, y, args.out, _cmd_prov(args, m.metadata.get("master_seed")),
                             args.importance or both, args.pdp or both, args.classes, args.pdp_features,
                             threads)
            _print(res)
        elif c == "evolve":
            series = evolution_series(read_snapshot(args.inp), args.package, args.start, args.end)
            prov = _cmd_prov(args)
            write_csv(args.out, EVOLUTION_COLUMNS, series.rows(), prov)
            if args.detect_shifts:
                events = detect_shifts(series, args.persistence)
                write_json(args.out.with_name("shifts.json"),
                           {"package": args.package, "first_1_0_0_month": series.first_post_1_0_0,
                            "shifts": [e.to_json() for e in events]}, prov)
        elif c == "sample":
            rows = read_csv(args.labels, LABEL_COLUMNS)
            picked = sample_packages(rows, args.per_class, args.min_dependents, args.max_dependents,
                                     stage_seed(args.seed, "sample"))
            write_csv(args.out, LABEL_COLUMNS, picked, _cmd_prov(args, args.seed))
        elif c == "recommend":
            m = load_model(args.model)
            if args.inline is not None:
                _print(recommend(m, inline_features(args.inline)))
            else:
                if args.features is None:
                    raise InputError("--package needs --features")
                names, X, _ = load_features(args.features)
                if args.package not in names:
                    raise UnknownPackage(f"package not in feature file: {args.package}")
                _print(recommend(m, X[names.index(args.package)].tolist(), args.package))
        else:  # pragma: no cover - argparse rejects unknown commands
            raise InputError(f"unknown command {c}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except StageError as exc:
        cause = exc.cause
        bad_input = isinstance(cause, (InputError, ConstraintError, UnknownPackage))
        print(f"depstrat: error [stage={exc.stage}] {type(cause).__name__}: {cause}", file=sys.stderr)
        if not bad_input:
            log.debug("internal error", exc_info=cause)
        return 2 if bad_input else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
