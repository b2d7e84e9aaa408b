"""Metrics (confusion, per-class P/R/F1, OvR ROC-AUC), permutation importance, partial dependence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .forest import CLASS_ORDER, ForestModel, Prediction, predictions_to_matrix, stage_seed

N_REPEATS = 10
PDP_GRID_POINTS = 20
PDP_MAX_ROWS = 50_000


def midranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    bounds = np.flatnonzero(np.diff(xs)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [len(xs)]))
    ranks = np.empty(len(x))
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + 1 + e) / 2.0
    return ranks


def roc_auc(scores: Sequence[float], positive: Sequence[bool]) -> Optional[float]:
    """Mann-Whitney AUC with midranks; None when one side is empty."""
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    r = midranks(scores)
    return float((r[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def per_class_auc(proba: np.ndarray, truth: Sequence[str],
                  class_order: Sequence[str] = CLASS_ORDER) -> dict[str, Optional[float]]:
    truth = np.asarray(truth)
    return {c: roc_auc(proba[:, i], truth == c) for i, c in enumerate(class_order)}


def macro_auc(proba: np.ndarray, truth: Sequence[str],
              class_order: Sequence[str] = CLASS_ORDER) -> Optional[float]:
    """Unweighted mean of the defined one-vs-rest AUCs; None with fewer than two truth classes."""
    vals = [a for a in per_class_auc(proba, truth, class_order).values() if a is not None]
    return float(np.mean(vals)) if vals else None


@dataclass
class EvaluationReport:
    class_order: tuple[str, ...]
    confusion: np.ndarray
    per_class: dict[str, dict[str, float]]
    weighted_f1: float
    macro_f1: float
    accuracy: float
    macro_ovr_roc_auc: Optional[float]
    per_class_auc: dict[str, Optional[float]]

    def to_json(self) -> dict:
        return {
            "class_order": list(self.class_order),
            "confusion": self.confusion.tolist(),
            "per_class": self.per_class,
            "weighted_f1": self.weighted_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "macro_ovr_roc_auc": self.macro_ovr_roc_auc,
            "per_class_auc": self.per_class_auc,
        }


def prf_from_confusion(confusion: np.ndarray, class_order: Sequence[str]) -> dict[str, dict[str, float]]:
    out = {}
    for i, c in enumerate(class_order):
        tp = confusion[i, i]
        col, row = confusion[:, i].sum(), confusion[i, :].sum()
        p = tp / col if col else 0.0
        r = tp / row if row else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        out[c] = {"precision": float(p), "recall": float(r), "f1": float(f1), "support": int(row)}
    return out


def evaluate(preds: Sequence[Prediction] | np.ndarray, truth: Sequence[str],
             class_order: Sequence[str] = CLASS_ORDER) -> EvaluationReport:
    proba = preds if isinstance(preds, np.ndarray) else predictions_to_matrix(preds)
    if len(proba) != len(truth):
        raise ValueError("predictions and truth differ in length")
    class_order = tuple(class_order)
    idx = {c: i for i, c in enumerate(class_order)}
    t = np.array([idx[c] for c in truth], dtype=np.int64)
    p = np.argmax(proba, axis=1) if len(proba) else np.zeros(0, dtype=np.int64)
    k = len(class_order)
    confusion = np.bincount(t * k + p, minlength=k * k).reshape(k, k)
    per_class = prf_from_confusion(confusion, class_order)
    n = len(t)
    support = confusion.sum(axis=1)
    f1s = np.array([per_class[c]["f1"] for c in class_order])
    aucs = per_class_auc(proba, truth, class_order)
    defined = [a for a in aucs.values() if a is not None]
    return EvaluationReport(
        class_order,
        confusion,
        per_class,
        # share-times-f1 per class, so a one-class predictor yields prevalence * f1 bit for bit
        float(sum((support[i] / n) * f1s[i] for i in range(k))) if n else 0.0,
        float(f1s.mean()),
        float(np.trace(confusion) / n) if n else 0.0,
        float(np.mean(defined)) if len(set(truth)) >= 2 and defined else None,
        aucs,
    )


# ---------------------------------------------------------------- permutation importance


@dataclass
class ImportanceReport:
    feature_names: list[str]
    drops: np.ndarray  # (n_features, n_repeats)
    baseline_auc: float
    seed: int

    def summary(self) -> list[dict]:
        rows = []
        for name, d in zip(self.feature_names, self.drops):
            q1, med, q3 = np.percentile(d, [25, 50, 75])
            rows.append({"feature": name, "mean": float(d.mean()), "std": float(d.std()),
                         "min": float(d.min()), "q1": float(q1), "median": float(med),
                         "q3": float(q3), "max": float(d.max())})
        return rows

    def ranking(self) -> list[str]:
        means = self.drops.mean(axis=1)
        order = sorted(range(len(means)), key=lambda i: (-means[i], i))
        return [self.feature_names[i] for i in order]


def permutation_importance(m: ForestModel, X: np.ndarray, truth: Sequence[str], seed: int,
                           n_repeats: int = N_REPEATS, threads: int = 1) -> ImportanceReport:
    """Drop in macro OvR AUC when one column is shuffled, ``n_repeats`` times per column.

    Repetition r uses the same row permutation for every column, so the
    result does not depend on column order.
    """
    X = np.asarray(X, dtype=float)
    base = macro_auc(m.predict_proba(X, threads), truth, m.class_order)
    perms = [np.random.default_rng(np.random.SeedSequence([seed, r])).permutation(len(X))
             for r in range(n_repeats)]
    used = m.used_features()
    drops = np.zeros((X.shape[1], n_repeats))
    for j in range(X.shape[1]):
        if j not in used:
            continue
        for r, perm in enumerate(perms):
            Xp = X.copy()
            Xp[:, j] = X[perm, j]
            drops[j, r] = base - macro_auc(m.predict_proba(Xp, threads), truth, m.class_order)
    names = m.feature_names or [f"x{j}" for j in range(X.shape[1])]
    return ImportanceReport(list(names), drops, base, seed)


# ---------------------------------------------------------------- partial dependence


@dataclass
class PDPGrid:
    feature: str
    grid: np.ndarray
    mean_probability: dict[str, np.ndarray]  # class -> value per grid point
    deciles: np.ndarray
    n_rows: int = 0
    extra: dict = field(default_factory=dict)

    def rows(self, cls: str) -> list[dict]:
        return [{"grid_value": float(g), "mean_probability": float(p)}
                for g, p in zip(self.grid, self.mean_probability[cls])]


def pdp_grid(x: np.ndarray, categorical: bool, points: int = PDP_GRID_POINTS) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if categorical:
        return np.unique(x)
    return np.unique(np.quantile(x, np.linspace(0.0, 1.0, points)))


def partial_dependence(m: ForestModel, X: np.ndarray, feature: int,
                       classes: Optional[Sequence[str]] = None, categorical: bool = False,
                       grid_points: int = PDP_GRID_POINTS, max_rows: int = PDP_MAX_ROWS,
                       seed: int = 0, threads: int = 1) -> PDPGrid:
    """Average predicted class probability with column ``feature`` forced to each grid value."""
    X = np.asarray(X, dtype=float)
    if len(X) > max_rows:
        rows = np.sort(np.random.default_rng(stage_seed(seed, "pdp")).choice(len(X), max_rows, replace=False))
        X = X[rows]
    grid = pdp_grid(X[:, feature], categorical, grid_points)
    classes = list(classes or m.class_order)
    cidx = [m.class_order.index(c) for c in classes]
    out = {c: np.zeros(len(grid)) for c in classes}
    if feature not in m.used_features():
        mean = m.predict_proba(X, threads).mean(axis=0)
        for c, i in zip(classes, cidx):
            out[c][:] = mean[i]
    else:
        for g_i, g in enumerate(grid):
            Xg = X.copy()
            Xg[:, feature] = g
            mean = m.predict_proba(Xg, threads).mean(axis=0)
            for c, i in zip(classes, cidx):
                out[c][g_i] = mean[i]
    name = m.feature_names[feature] if m.feature_names else f"x{feature}"
    deciles = np.quantile(X[:, feature], np.linspace(0.1, 0.9, 9))
    return PDPGrid(name, grid, out, deciles, len(X))
