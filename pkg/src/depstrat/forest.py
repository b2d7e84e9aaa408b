"""Deterministic random-forest classifier (CART / Gini), baselines, splitting and CV tuning."""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .ingest import InputError

CLASS_ORDER: tuple[str, ...] = ("balanced", "permissive", "restrictive", "unspecialized")
MODEL_FORMAT = "depstrat-forest"
MODEL_VERSION = 1
LEAF = -1
MIN_CHUNK_ROWS = 512  # below this, thread startup costs more than it saves


class TooFewRows(InputError):
    pass


class EmptyClass(UserWarning):
    """A class has no training rows; its probability stays zero."""


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    min_samples_split: int = 8
    max_features: Optional[int] = None  # None -> floor(sqrt(d))

    def features_per_split(self, d: int) -> int:
        return self.max_features or max(1, math.isqrt(d))


@dataclass(frozen=True)
class DatasetSplit:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    fractions: tuple[float, float] = (0.8, 0.2)


@dataclass(frozen=True)
class Prediction:
    class_probabilities: tuple[float, ...]
    predicted: str


def gini(counts: Sequence[float]) -> float:
    c = np.asarray(counts, dtype=float)
    n = c.sum()
    return 0.0 if n == 0 else float(1.0 - ((c / n) ** 2).sum())


def encode_labels(labels: Iterable[str], class_order: Sequence[str] = CLASS_ORDER) -> np.ndarray:
    idx = {c: i for i, c in enumerate(class_order)}
    try:
        return np.array([idx[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise InputError(f"unknown class label {exc.args[0]!r}") from None


def tree_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per (seed, tree); order of training is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def stage_seed(seed: int, name: str) -> int:
    """Stage-local seed derived from the master seed and a stage name."""
    words = [seed] + [ord(ch) for ch in name]
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint32)[0])


# ---------------------------------------------------------------- trees


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # per-node class counts

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = np.arange(len(X))
        while len(active):
            f = self.feature[node[active]]
            internal = f != LEAF
            active = active[internal]
            if not len(active):
                break
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return node

    def leaf_proba(self) -> np.ndarray:
        v = self.value.astype(float)
        s = v.sum(axis=1, keepdims=True)
        return np.divide(v, s, out=np.zeros_like(v), where=s > 0)

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        return cls(
            np.array(obj["feature"], dtype=np.int64),
            np.array(obj["threshold"], dtype=float),
            np.array(obj["left"], dtype=np.int64),
            np.array(obj["right"], dtype=np.int64),
            np.array(obj["value"], dtype=np.int64).reshape(len(obj["feature"]), -1),
        )


def _best_split(Xn: np.ndarray, yn: np.ndarray, onehot: np.ndarray, total: np.ndarray,
                features: np.ndarray, max_features: int):
    """Lowest weighted child Gini over the first ``max_features`` non-constant candidates."""
    n = len(yn)
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    best = (math.inf, -1, 0.0)
    evaluated = 0
    for f in features:
        xs = Xn[:, f]
        order = np.argsort(xs, kind="stable")
        xs_s = xs[order]
        if xs_s[0] == xs_s[-1]:
            continue
        evaluated += 1
        left = np.cumsum(onehot[order[:-1]], axis=0)
        right = total - left
        score = (nl - (left * left).sum(axis=1) / nl) + (nr - (right * right).sum(axis=1) / nr)
        score[xs_s[:-1] == xs_s[1:]] = math.inf
        i = int(np.argmin(score))
        if score[i] < best[0]:
            lo, hi = xs_s[i], xs_s[i + 1]
            thr = (lo + hi) / 2.0
            if thr >= hi:
                thr = lo
            best = (float(score[i]), int(f), float(thr))
        if evaluated >= max_features:
            break
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, n_classes: int, params: ForestParams,
              rng: np.random.Generator, sample: Optional[np.ndarray] = None) -> Tree:
    n, d = X.shape
    if sample is None:
        sample = rng.integers(0, n, n)
    k = params.features_per_split(d)
    eye = np.eye(n_classes)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[np.ndarray] = []

    def new_node(counts: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(counts)
        return len(feature) - 1

    root_counts = np.bincount(y[sample], minlength=n_classes)
    stack = [(new_node(root_counts), sample)]
    while stack:
        node, idx = stack.pop()
        counts = value[node]
        if len(idx) < params.min_samples_split or np.count_nonzero(counts) <= 1:
            continue
        yn = y[idx]
        Xn = X[idx]
        _, f, thr = _best_split(Xn, yn, eye[yn], counts.astype(float), rng.permutation(d), k)
        if f < 0:
            continue
        mask = Xn[:, f] <= thr
        li, ri = idx[mask], idx[~mask]
        lnode = new_node(np.bincount(y[li], minlength=n_classes))
        rnode = new_node(np.bincount(y[ri], minlength=n_classes))
        feature[node], threshold[node] = f, thr
        left[node], right[node] = lnode, rnode
        stack.append((rnode, ri))
        stack.append((lnode, li))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.int64).reshape(len(feature), n_classes),
    )


# ---------------------------------------------------------------- forest


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class ForestModel:
    trees: list[Tree]
    params: ForestParams
    seed: int
    n_features: int
    class_order: tuple[str, ...] = CLASS_ORDER
    feature_names: Optional[list[str]] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._tables = [t.leaf_proba() for t in self.trees]

    def predict_proba(self, X: np.ndarray, threads: int = 1) -> np.ndarray:
        """Mean of per-tree leaf class proportions; rows sum to 1."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise InputError(f"expected {self.n_features} features, got {X.shape[1]}")
        chunks = np.array_split(np.arange(len(X)), max(1, min(threads, len(X) // MIN_CHUNK_ROWS)))

        def run(rows: np.ndarray) -> np.ndarray:
            acc = np.zeros((len(rows), len(self.class_order)))
            Xr = X[rows]
            for tree, table in zip(self.trees, self._tables):
                acc += table[tree.apply(Xr)]
            return acc

        acc = np.concatenate(_map(run, chunks, threads)) if len(X) else np.zeros((0, len(self.class_order)))
        s = acc.sum(axis=1, keepdims=True)
        return np.divide(acc, s, out=np.full_like(acc, 1.0 / len(self.class_order)), where=s > 0)

    def predict_labels(self, X: np.ndarray, threads: int = 1) -> list[str]:
        proba = self.predict_proba(X, threads)
        return [self.class_order[i] for i in np.argmax(proba, axis=1)]

    def used_features(self) -> set[int]:
        return {int(f) for t in self.trees for f in t.feature if f != LEAF}

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "class_order": list(self.class_order),
            "params": asdict(self.params),
            "seed": self.seed,
            "n_features": self.n_features,
            "feature_names": self.feature_names,
            "metadata": self.metadata,
            "trees": [t.to_json() for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "ForestModel":
        if obj.get("format") != MODEL_FORMAT:
            raise InputError("not a depstrat forest model")
        if obj.get("version") != MODEL_VERSION:
            raise InputError(f"unsupported model version {obj.get('version')}")
        return cls(
            [Tree.from_json(t) for t in obj["trees"]],
            ForestParams(**obj["params"]),
            obj["seed"],
            obj["n_features"],
            tuple(obj["class_order"]),
            obj.get("feature_names"),
            obj.get("metadata", {}),
        )

    @classmethod
    def loads(cls, text: str) -> "ForestModel":
        return cls.from_json(json.loads(text))


def predict(m: ForestModel, x: Sequence[float]) -> Prediction:
    proba = m.predict_proba(np.asarray(x, dtype=float)[None, :])[0]
    return Prediction(tuple(float(p) for p in proba), m.class_order[int(np.argmax(proba))])


def bootstrap_sample(seed: int, index: int, n: int) -> np.ndarray:
    return tree_rng(seed, index).integers(0, n, n)


def train_forest(
    X: np.ndarray,
    labels: Sequence[str] | np.ndarray,
    params: ForestParams = ForestParams(),
    seed: int = 0,
    threads: int = 1,
    class_order: Sequence[str] = CLASS_ORDER,
    feature_names: Optional[Sequence[str]] = None,
) -> ForestModel:
    X = np.asarray(X, dtype=float)
    if not np.isfinite(X).all():
        raise InputError("feature matrix contains missing or non-finite values")
    y = labels if isinstance(labels, np.ndarray) and labels.dtype.kind == "i" else encode_labels(labels, class_order)
    absent = [c for i, c in enumerate(class_order) if not np.any(y == i)]
    if absent:
        warnings.warn(f"classes absent from training data: {absent}", EmptyClass)
    n_classes = len(class_order)

    def build(t: int) -> Tree:
        rng = tree_rng(seed, t)
        sample = rng.integers(0, len(X), len(X))
        return grow_tree(X, y, n_classes, params, rng, sample)

    trees = _map(build, range(params.n_trees), threads)
    return ForestModel(trees, params, seed, X.shape[1], tuple(class_order),
                       list(feature_names) if feature_names is not None else None)


def out_of_bag_accuracy(m: ForestModel, X: np.ndarray, labels: Sequence[str]) -> float:
    """Accuracy of each row's prediction from the trees that did not see it."""
    X = np.asarray(X, dtype=float)
    y = encode_labels(labels, m.class_order)
    acc = np.zeros((len(X), len(m.class_order)))
    for t, (tree, table) in enumerate(zip(m.trees, m._tables)):
        oob = np.ones(len(X), dtype=bool)
        oob[bootstrap_sample(m.seed, t, len(X))] = False
        rows = np.nonzero(oob)[0]
        acc[rows] += table[tree.apply(X[rows])]
    covered = acc.sum(axis=1) > 0
    return float(np.mean(np.argmax(acc[covered], axis=1) == y[covered]))


# ---------------------------------------------------------------- splitting, baselines, tuning


def _apportion(sizes: Sequence[int], fraction: float) -> list[int]:
    """Per-group test counts: floors plus largest remainders, summing to round(n * fraction)."""
    quotas = [s * fraction for s in sizes]
    counts = [math.floor(q) for q in quotas]
    extra = int(round(sum(sizes) * fraction)) - sum(counts)
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:max(0, extra)]:
        counts[i] += 1
    return counts


def split_dataset(labels: Sequence[str], seed: int, test_fraction: float = 0.2,
                  stratify: bool = True) -> DatasetSplit:
    n = len(labels)
    if n < 10:
        raise TooFewRows(f"need at least 10 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    if stratify:
        groups = [np.nonzero(labels == c)[0] for c in sorted(set(labels.tolist()))]
    else:
        groups = [np.arange(n)]
    test_counts = _apportion([len(g) for g in groups], test_fraction)
    train, test = [], []
    for g, t in zip(groups, test_counts):
        perm = rng.permutation(g)
        test.append(perm[:t])
        train.append(perm[t:])
    return DatasetSplit(np.sort(np.concatenate(train)), np.sort(np.concatenate(test)), seed,
                        (1 - test_fraction, test_fraction))


def _one_hot(label: str, class_order: Sequence[str]) -> Prediction:
    return Prediction(tuple(1.0 if c == label else 0.0 for c in class_order), label)


def baseline_stratified(train_labels: Sequence[str], test_n: int, seed: int,
                        class_order: Sequence[str] = CLASS_ORDER) -> list[Prediction]:
    """Labels sampled from the training-set class prior, one-hot."""
    y = encode_labels(train_labels, class_order)
    prior = np.bincount(y, minlength=len(class_order)) / len(y)
    draws = np.random.default_rng(seed).choice(len(class_order), size=test_n, p=prior)
    return [_one_hot(class_order[i], class_order) for i in draws]


def baseline_balanced(test_n: int, class_order: Sequence[str] = CLASS_ORDER) -> list[Prediction]:
    return [_one_hot("balanced", class_order) for _ in range(test_n)]


def predictions_to_matrix(preds: Sequence[Prediction]) -> np.ndarray:
    return np.array([p.class_probabilities for p in preds], dtype=float)


DEFAULT_GRID = tuple(
    ForestParams(n_trees=t, min_samples_split=m) for t in (500, 300, 100) for m in (8, 2, 16)
)


def tune_cv(
    X: np.ndarray,
    labels: Sequence[str],
    grid: Sequence[ForestParams] = DEFAULT_GRID,
    seed: int = 0,
    folds: int = 10,
    threads: int = 1,
) -> tuple[ForestParams, list[dict]]:
    """Stratified k-fold CV; returns the grid point with the highest mean macro OvR ROC-AUC.

    Ties keep the earlier grid entry, and the default grid starts at (500, 8).
    """
    from .evaluation import macro_auc

    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for c in sorted(set(labels.tolist())):
        idx = rng.permutation(np.nonzero(labels == c)[0])
        fold_of[idx] = np.arange(len(idx)) % folds
    results = []
    for params in grid:
        scores = []
        for k in range(folds):
            tr, va = fold_of != k, fold_of == k
            if not va.any():
                continue
            m = train_forest(X[tr], labels[tr].tolist(), params, stage_seed(seed, f"fold{k}"), threads)
            auc = macro_auc(m.predict_proba(X[va], threads), labels[va].tolist())
            if auc is not None:
                scores.append(auc)
        results.append({**asdict(params), "mean_auc": float(np.mean(scores)) if scores else None})
    best = max(range(len(grid)), key=lambda i: (results[i]["mean_auc"] or -1.0, -i))
    return grid[best], results
