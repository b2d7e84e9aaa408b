import random
import warnings
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depstrat.features import (
    FEATURE_NAMES, DegenerateCorpus, DomainModel, FeatureVector, correlation_audit, derive_features,
    fit_domain_model, group_keywords, kmeans, license_codes, months_between, score_ngrams,
)
from depstrat.graph import build_graph
from helpers import pkg, snapshot

SNAP = date(2020, 1, 12)


def monthly_releases(n, start=date(2015, 1, 5), major=1):
    return [(f"{major}.{i}.0", date(start.year + (start.month - 1 + i) // 12, (start.month - 1 + i) % 12 + 1, 5))
            for i in range(n)]


def features_for(*packages, edges=(), names=None):
    s = snapshot(packages, edges, SNAP)
    # one-domain model: domain ids are not under test here
    dm = DomainModel({}, [], np.zeros((1, 0)), 0, degenerate=True)
    return derive_features(s, build_graph(s), dm, names=names or [p.name for p in packages])


def test_names_and_count():
    assert len(FEATURE_NAMES) == 19
    assert FEATURE_NAMES[:3] == ("dependency_count", "transitive_dependency_count", "dependent_count")


def test_version_frequency_per_month():
    created = date(2015, 1, 12)
    vs = [(f"1.{i}.0", date(2015, 1 + i, 12)) for i in range(10)]
    f = features_for(pkg("a", *vs, created=created))["a"]
    assert f.age_months == months_between(created, SNAP) == 60
    assert f.version_frequency == pytest.approx(10 / 60)

    vs = [(f"1.{i}.0", date(2019, 12, 1 + i)) for i in range(10)]
    f = features_for(pkg("b", *vs))["b"]
    assert f.age_months == 1 and f.version_frequency == 10.0


def test_age_zero_frequency_is_count():
    vs = [(f"0.{i}.0", date(2020, 1, 2 + i)) for i in range(4)]
    f = features_for(pkg("new", *vs))["new"]
    assert f.age_months == 0 and f.version_frequency == 4.0


def test_release_status_and_recency():
    f = features_for(pkg("a", ("0.9.1", date(2019, 12, 12))))["a"]
    assert f.release_status == 0 and f.days_since_last_release == 31
    f = features_for(pkg("b", ("0.9.1", date(2018, 1, 1)), ("1.0.0", date(2019, 1, 1))))["b"]
    assert f.release_status == 1


def test_license_encoding():
    codes = license_codes(["MIT", "", "ISC", "MIT, Apache-2.0", "Apache-2.0,MIT"])
    assert codes == {"": 0, "Apache-2.0,MIT": 1, "ISC": 2, "MIT": 3}
    fs = features_for(pkg("a", ("1.0.0", SNAP), license_text="MIT"), pkg("b", ("1.0.0", SNAP)))
    assert fs["a"].license_code == 1 and fs["b"].license_code == 0


def test_missing_repo_imputes_zero():
    f = features_for(pkg("a", ("1.0.0", SNAP)))["a"]
    assert (f.repository_size_kb, f.repository_stars, f.repository_open_issues) == (0, 0, 0)
    assert (f.has_repo_license, f.has_repo_readme, f.sourcerank) == (0, 0, 0)


def test_row_roundtrip():
    f = features_for(pkg("a", *monthly_releases(5)))["a"]
    assert FeatureVector.from_row(f.as_row()) == f
    with pytest.raises(ValueError):
        FeatureVector.from_row([0] * 18)


# ---------------------------------------------------------------- keyword domains


def test_pmi_of_always_together_pair():
    # react and component always co-occur, each in half the documents
    docs = [["component", "react"]] * 20 + [[f"solo{i}"] for i in range(20)]
    scored = score_ngrams(docs, min_count=10)
    assert scored[0][0] == ("component", "react")
    assert scored[0][1] == pytest.approx(2.0)
    assert scored[0][2] == 20


def test_min_count_filters():
    docs = [["a", "b"]] * 9
    assert score_ngrams(docs, min_count=10) == []


def test_grouping_picks_most_frequent():
    mapping = group_keywords([("a", "b"), ("b", "c"), ("x", "y")], {"a": 5, "b": 9, "c": 1, "x": 2, "y": 2})
    assert mapping == {"a": "b", "b": "b", "c": "b", "x": "x", "y": "x"}


def two_populations(n=60):
    corpus = {}
    for i in range(n):
        corpus[f"ui{i:03d}"] = ["react", "component", "ui", f"u{i % 12}"]
        corpus[f"db{i:03d}"] = ["database", "sql", "orm", f"d{i % 12}"]
    return corpus


def test_separable_populations_split_exactly():
    corpus = two_populations()
    dm = fit_domain_model(corpus, seed=3, k=2)
    ui = {dm.assign(corpus[n]) for n in corpus if n.startswith("ui")}
    db = {dm.assign(corpus[n]) for n in corpus if n.startswith("db")}
    assert len(ui) == 1 and len(db) == 1 and ui != db


def test_no_keywords_deterministic():
    dm = fit_domain_model(two_populations(), seed=3, k=2)
    assert dm.assign([]) == dm.assign(()) == fit_domain_model(two_populations(), seed=3, k=2).assign([])


def test_degenerate_corpus_warns():
    with pytest.warns(DegenerateCorpus):
        dm = fit_domain_model({"a": ["x"], "b": ["y"]}, seed=0, k=10)
    assert dm.assign(["x"]) == dm.assign([]) == 1


def test_model_json_roundtrip():
    corpus = two_populations()
    dm = fit_domain_model(corpus, seed=1, k=3)
    again = DomainModel.from_json(dm.to_json())
    assert all(again.assign(kw) == dm.assign(kw) for kw in corpus.values())


def test_kmeans_recovers_blobs():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.1, (50, 2)), rng.normal(5, 0.1, (50, 2))])
    c = np.sort(kmeans(pts, 2, seed=4)[:, 0])
    assert c == pytest.approx([0, 5], abs=0.1)


@settings(max_examples=20, deadline=None)
@given(st.randoms())
def test_domain_invariant_to_row_order(rnd):
    corpus = two_populations(30)
    items = list(corpus.items())
    rnd.shuffle(items)
    a = fit_domain_model(corpus, seed=5, k=3)
    b = fit_domain_model(dict(items), seed=5, k=3)
    assert [a.assign(kw) for kw in corpus.values()] == [b.assign(kw) for kw in corpus.values()]


# ---------------------------------------------------------------- derivation invariants


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(0, 80))
def test_frequency_times_age_is_count(n_versions, start_offset):
    start = date(2013, 1, 1)
    start = date(start.year + start_offset // 12, start_offset % 12 + 1, 1)
    vs = [(f"1.{i}.0", start) for i in range(n_versions)]
    f = features_for(pkg("a", *vs))["a"]
    if f.age_months > 0:
        assert f.version_frequency * f.age_months == pytest.approx(n_versions)
    else:
        assert f.version_frequency == n_versions


def test_derivation_is_deterministic():
    ps = [pkg(f"p{i}", *monthly_releases(3 + i), keywords=["ui"] if i % 2 else ["db"]) for i in range(6)]
    a = features_for(*ps)
    b = features_for(*reversed(ps))
    assert a == b and list(a) == sorted(a)


# ---------------------------------------------------------------- correlation audit


def test_duplicate_column_flagged():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(200, 3))
    x = np.column_stack([x, x[:, 0]])
    audit = correlation_audit(x, ["a", "b", "c", "a2"], keep=["a", "b", "c", "a2"])
    assert len(audit["flagged_pairs"]) == 1
    pair = audit["flagged_pairs"][0]
    assert pair["r"] == pytest.approx(1.0) and pair["keep"] == "a" and pair["suggested_drop"] == "a2"
    assert x.shape[1] == 4


def test_independent_columns_uncorrelated():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(10_000, 4))
    audit = correlation_audit(x, list("abcd"))
    off = [audit["matrix"][a][b] for a in "abcd" for b in "abcd" if a != b]
    assert max(abs(r) for r in off) < 0.05
    assert audit["flagged_pairs"] == []


def test_constant_column_noted():
    x = np.column_stack([np.arange(10.0), np.ones(10)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        audit = correlation_audit(x, ["a", "k"])
    assert audit["constant_columns"] == ["k"]
    assert audit["matrix"]["a"]["k"] is None


def test_audit_matches_numpy():
    rng = random.Random(2)
    x = np.array([[rng.random(), rng.random() ** 2, rng.randint(0, 3)] for _ in range(300)])
    audit = correlation_audit(x, list("abc"))
    ref = np.corrcoef(x, rowvar=False)
    for i, a in enumerate("abc"):
        for j, b in enumerate("abc"):
            assert audit["matrix"][a][b] == pytest.approx(ref[i, j], abs=1e-9)
