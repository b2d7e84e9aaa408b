"""Package characteristics: the 19 model features, keyword domain clustering, correlation audit."""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import astuple, dataclass, fields
from datetime import date
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .graph import DepGraph, all_transitive_counts
from .ingest import EcosystemSnapshot, RepoMetadata
from .semver import ONE


@dataclass(frozen=True)
class FeatureVector:
    dependency_count: int
    transitive_dependency_count: int
    dependent_count: int
    version_frequency: float
    age_months: int
    has_description: int
    has_keywords: int
    has_homepage: int
    license_code: int
    sourcerank: int
    release_status: int
    days_since_last_release: int
    dependent_repositories: int
    repository_size_kb: int
    repository_open_issues: int
    repository_stars: int
    has_repo_license: int
    has_repo_readme: int
    domain: int

    def as_row(self) -> list[float]:
        return list(astuple(self))

    @classmethod
    def from_row(cls, row: Sequence[float]) -> "FeatureVector":
        if len(row) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(row)}")
        vals = [float(v) if n == "version_frequency" else int(round(float(v)))
                for n, v in zip(FEATURE_NAMES, row)]
        return cls(*vals)


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in fields(FeatureVector))
# binary / code-valued columns; partial dependence uses their distinct values as the grid
CATEGORICAL_FEATURES = frozenset({
    "has_description", "has_keywords", "has_homepage", "license_code", "release_status",
    "has_repo_license", "has_repo_readme", "domain",
})
TOP_FEATURES = ("release_status", "dependent_count", "age_months")


def months_between(start: date, end: date) -> int:
    """Calendar-month difference; day of month ignored, never negative."""
    return max(0, (end.year - start.year) * 12 + (end.month - start.month))


def normalize_license(text: str) -> str:
    parts = sorted({p.strip() for p in text.replace(";", ",").split(",") if p.strip()})
    return ",".join(parts)


def license_codes(texts: Iterable[str]) -> dict[str, int]:
    """Sorted dictionary encoding: distinct normalized strings coded 1..n, empty coded 0."""
    distinct = sorted({normalize_license(t) for t in texts} - {""})
    codes = {t: i + 1 for i, t in enumerate(distinct)}
    codes[""] = 0
    return codes


# ---------------------------------------------------------------- domain model


class DegenerateCorpus(UserWarning):
    """Too few distinct keywords to cluster; every package lands in domain 1."""


def normalize_keywords(keywords: Iterable[str], limit: Optional[int] = None) -> list[str]:
    kws = sorted({k.strip().lower() for k in keywords if k and k.strip()})
    return kws[:limit] if limit else kws


def pmi(joint: float, marginals: Sequence[float]) -> float:
    return math.log2(joint / math.prod(marginals))


def score_ngrams(
    docs: Sequence[Sequence[str]], min_count: int = 10, orders: Sequence[int] = (2, 3)
) -> list[tuple[tuple[str, ...], float, int]]:
    """PMI for keyword co-occurrence n-grams within each document.

    The joint probability is the n-gram's share of all n-grams of its order;
    each keyword's probability is its document frequency over the corpus size.
    Returns (ngram, pmi, count) sorted by descending PMI, ties by n-gram.
    """
    n_docs = len(docs)
    df = Counter(w for d in docs for w in set(d))
    scored = []
    for order in orders:
        counts = Counter(c for d in docs for c in itertools.combinations(sorted(set(d)), order))
        total = sum(counts.values())
        for gram, cnt in counts.items():
            if cnt >= min_count:
                scored.append((gram, pmi(cnt / total, [df[w] / n_docs for w in gram]), cnt))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored


def group_keywords(ngrams: Iterable[Sequence[str]], df: Mapping[str, int]) -> dict[str, str]:
    """Union overlapping n-grams; map each member to the group's most frequent keyword."""
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for gram in ngrams:
        first = find(gram[0])
        for w in gram[1:]:
            r = find(w)
            if r != first:
                parent[r] = first
    members: dict[str, list[str]] = {}
    for w in parent:
        members.setdefault(find(w), []).append(w)
    mapping = {}
    for group in members.values():
        rep = min(group, key=lambda w: (-df.get(w, 0), w))
        for w in group:
            mapping[w] = rep
    return mapping


def farthest_point_init(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    uniq = np.unique(points, axis=0)
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(len(uniq)))]
    d2 = ((uniq - uniq[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((uniq - uniq[nxt]) ** 2).sum(axis=1))
    return uniq[chosen].astype(float)


def assign_clusters(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def kmeans(points: np.ndarray, k: int, seed: int, max_iter: int = 300, tol: float = 1e-4) -> np.ndarray:
    """Lloyd's algorithm from farthest-point seeding; empty clusters keep their centroid."""
    points = np.asarray(points, dtype=float)
    centroids = farthest_point_init(points, k, seed)
    for _ in range(max_iter):
        assign = assign_clusters(points, centroids)
        new = centroids.copy()
        for j in range(k):
            members = points[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if shift <= tol:
            break
    return centroids


@dataclass
class DomainModel:
    mapping: dict[str, str]
    vocabulary: list[str]
    centroids: np.ndarray
    seed: int
    max_keywords: Optional[int] = 30
    degenerate: bool = False

    @property
    def ngram_groups(self) -> list[dict]:
        groups: dict[str, list[str]] = {}
        for w, rep in self.mapping.items():
            groups.setdefault(rep, []).append(w)
        return [{"representative": r, "members": sorted(m)} for r, m in sorted(groups.items())]

    def vectorize(self, keywords: Iterable[str]) -> np.ndarray:
        mapped = Counter(self.mapping.get(w, w) for w in normalize_keywords(keywords, self.max_keywords))
        return np.array([mapped[t] for t in self.vocabulary], dtype=float)

    def assign(self, keywords: Iterable[str]) -> int:
        """Domain id in 1..k."""
        return int(assign_clusters(self.vectorize(keywords)[None, :], self.centroids)[0]) + 1

    def to_json(self) -> dict:
        return {
            "format": "depstrat-domain-model",
            "version": 1,
            "seed": self.seed,
            "max_keywords": self.max_keywords,
            "degenerate": self.degenerate,
            "vocabulary": self.vocabulary,
            "ngram_groups": self.ngram_groups,
            "centroids": self.centroids.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DomainModel":
        mapping = {m: g["representative"] for g in obj["ngram_groups"] for m in g["members"]}
        return cls(mapping, list(obj["vocabulary"]), np.array(obj["centroids"], dtype=float),
                   obj["seed"], obj.get("max_keywords"), obj.get("degenerate", False))


def fit_domain_model(
    corpus: EcosystemSnapshot | Mapping[str, Sequence[str]],
    seed: int,
    k: int = 10,
    vocab_size: int = 15,
    top_ngrams: int = 2000,
    min_count: int = 10,
    max_keywords: Optional[int] = 30,
) -> DomainModel:
    """Keyword n-gram grouping by PMI, top-frequency vocabulary, then k-means on term counts.

    ``corpus`` is a snapshot or a mapping name -> keywords. Rows are processed
    in name order so results do not depend on input iteration order.
    """
    if isinstance(corpus, EcosystemSnapshot):
        corpus = {n: p.keywords for n, p in corpus.packages.items()}
    docs = [normalize_keywords(corpus[n], max_keywords) for n in sorted(corpus)]
    df = Counter(w for d in docs for w in d)
    if len(df) < k:
        warnings.warn(f"only {len(df)} distinct keywords; using a single domain", DegenerateCorpus)
        return DomainModel({}, [], np.zeros((k, 0)), seed, max_keywords, degenerate=True)

    top = [g for g, _, _ in score_ngrams(docs, min_count)[:top_ngrams]]
    mapping = group_keywords(top, df)
    mapped_docs = [[mapping.get(w, w) for w in d] for d in docs]
    rep_df = Counter(w for d in mapped_docs for w in set(d))
    vocabulary = [w for w, _ in sorted(rep_df.items(), key=lambda kv: (-kv[1], kv[0]))[:vocab_size]]
    vocab_idx = {w: i for i, w in enumerate(vocabulary)}
    tf = np.zeros((len(docs), len(vocabulary)))
    for i, d in enumerate(mapped_docs):
        for w in d:
            j = vocab_idx.get(w)
            if j is not None:
                tf[i, j] += 1
    centroids = kmeans(tf, k, seed)
    return DomainModel(mapping, vocabulary, centroids, seed, max_keywords)


# ---------------------------------------------------------------- feature derivation


def derive_features(
    s: EcosystemSnapshot,
    g: DepGraph,
    dm: DomainModel,
    snapshot_date: Optional[date] = None,
    names: Optional[Iterable[str]] = None,
) -> dict[str, FeatureVector]:
    """Feature vectors for ``names`` (default: the labeled population), in name order."""
    when = snapshot_date or s.snapshot_date
    names = sorted(s.labeled_population() if names is None else names)
    codes = license_codes(s.packages[n].license_text for n in names)
    trans = all_transitive_counts(g)
    out = {}
    for n in names:
        p = s.packages[n]
        repo = p.repo or RepoMetadata()
        age = months_between(p.created_at, when)
        n_versions = len(p.versions)
        out[n] = FeatureVector(
            dependency_count=len(g.forward[n]),
            transitive_dependency_count=trans[n][1],
            dependent_count=len(g.reverse[n]),
            version_frequency=n_versions / age if age > 0 else float(n_versions),
            age_months=age,
            has_description=int(p.has_description),
            has_keywords=int(bool(p.keywords)),
            has_homepage=int(p.has_homepage),
            license_code=codes[normalize_license(p.license_text)],
            sourcerank=p.sourcerank or 0,
            release_status=int(p.latest_version >= ONE),
            days_since_last_release=max(0, (when - p.last_published).days),
            dependent_repositories=p.dependent_repositories or 0,
            repository_size_kb=repo.size_kb or 0,
            repository_open_issues=repo.open_issues or 0,
            repository_stars=repo.stars or 0,
            has_repo_license=int(repo.has_license_file),
            has_repo_readme=int(repo.has_readme),
            domain=dm.assign(p.keywords),
        )
    return out


# ---------------------------------------------------------------- correlation audit


def correlation_audit(
    matrix: np.ndarray,
    names: Sequence[str] = FEATURE_NAMES,
    threshold: float = 0.7,
    keep: Sequence[str] = FEATURE_NAMES,
) -> dict:
    """Pearson r for every column pair; pairs above ``threshold`` get a keep/drop suggestion.

    ``keep`` ranks columns by preference: the earlier one of a flagged pair is
    suggested for keeping. Constant columns are noted and treated as uncorrelated.
    Nothing is removed from the input.
    """
    x = np.asarray(matrix, dtype=float)
    rank = {n: i for i, n in enumerate(keep)}
    std = x.std(axis=0)
    constant = [names[j] for j in range(x.shape[1]) if std[j] == 0]
    z = np.zeros_like(x)
    ok = std > 0
    z[:, ok] = (x[:, ok] - x[:, ok].mean(axis=0)) / std[ok]
    r = np.clip(z.T @ z / len(x), -1.0, 1.0)
    pairs = []
    for i, j in itertools.combinations(range(x.shape[1]), 2):
        if not (ok[i] and ok[j]) or abs(r[i, j]) <= threshold:
            continue
        a, b = names[i], names[j]
        keep_a = rank.get(a, len(rank) + i) <= rank.get(b, len(rank) + j)
        pairs.append({"a": a, "b": b, "r": float(r[i, j]),
                      "keep": a if keep_a else b, "suggested_drop": b if keep_a else a})
    return {
        "threshold": threshold,
        "n_rows": int(x.shape[0]),
        "flagged_pairs": pairs,
        "constant_columns": constant,
        "matrix": {names[i]: {names[j]: (float(r[i, j]) if ok[i] and ok[j] else None)
                              for j in range(x.shape[1])} for i in range(x.shape[1])},
    }
