import csv
from collections import Counter
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depstrat.ingest import (
    DEVELOPMENT, OPTIONAL, RUNTIME, MissingFile, RepoMetadata, SchemaMismatch, UnknownPackage,
    apply_filters, dumps_snapshot, impute_missing, load_librariesio, map_kind, read_snapshot,
    spam_matcher,
)
from depstrat.semver import parse_version
from depstrat.synthetic import DEPENDENCY_HEADER, PROJECT_HEADER, VERSION_HEADER, synthetic_ecosystem
from helpers import edge, pkg, snapshot

D = date(2018, 3, 1)


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, header, restval="")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def project(name, created="2018-01-01", platform="NPM", **kw):
    return {"Platform": platform, "Name": name, "Created Timestamp": created, **kw}


def version(name, number, published="2018-03-01 10:00:00 UTC", platform="NPM"):
    return {"Platform": platform, "Project Name": name, "Number": number, "Published Timestamp": published}


def dependency(name, number, target, req, kind="runtime", platform="NPM", optional="false"):
    return {"Platform": platform, "Project Name": name, "Version Number": number, "Dependency Name": target,
            "Dependency Platform": platform, "Dependency Kind": kind, "Optional Dependency": optional,
            "Dependency Requirements": req}


@pytest.fixture
def tiny(tmp_path):
    p = write(tmp_path / "projects.csv", PROJECT_HEADER, [project("a"), project("b"), project("c")])
    v = write(tmp_path / "versions.csv", VERSION_HEADER,
              [version("a", "1.0.0"), version("b", "1.0.0"), version("c", "2.0.0")])
    d = write(tmp_path / "dependencies.csv", DEPENDENCY_HEADER,
              [dependency("a", "1.0.0", "c", "^2.0.0"), dependency("b", "1.0.0", "c", "~2.0.0")])
    return p, v, d


def test_identity_load(tiny):
    s = load_librariesio(*tiny, date(2020, 1, 12))
    assert sorted(s.packages) == ["a", "b", "c"]
    assert [(e.dependent, e.target, e.constraint_text, e.kind) for e in s.edges] == [
        ("a", "c", "^2.0.0", RUNTIME), ("b", "c", "~2.0.0", RUNTIME)]
    assert s.labeled_population() == ["c"]


def test_missing_requirements_column(tmp_path, tiny):
    bad = [h for h in DEPENDENCY_HEADER if h != "Dependency Requirements"]
    d = write(tmp_path / "deps2.csv", bad, [])
    with pytest.raises(SchemaMismatch):
        load_librariesio(tiny[0], tiny[1], d, date(2020, 1, 12))


def test_missing_file(tmp_path, tiny):
    with pytest.raises(MissingFile):
        load_librariesio(tmp_path / "nope.csv", tiny[1], tiny[2], date(2020, 1, 12))


def test_platform_malformed_and_future_rows(tmp_path):
    p = write(tmp_path / "p.csv", PROJECT_HEADER,
              [project("a"), project("b"), project("requests", platform="Pypi")])
    v = write(tmp_path / "v.csv", VERSION_HEADER, [
        version("a", "1.0.0"), version("a", "not-a-version"), version("a", "2.0.0", "2021-01-01"),
        version("b", "0.1.0"), version("requests", "2.0.0", platform="Pypi"),
    ])
    d = write(tmp_path / "d.csv", DEPENDENCY_HEADER, [
        dependency("a", "1.0.0", "b", "^0.1.0"),
        dependency("a", "1.0.0", "b", "^0.1.0", kind="weird"),
        dependency("a", "1.0.0", "a", "*"),
        dependency("a", "1.0.0", "ghost", "^1.0.0"),
        dependency("b", "0.1.0", "a", "^1.0.0", kind="Development"),
    ])
    report = {}
    s = load_librariesio(p, v, d, date(2020, 1, 12), report=report)
    load = report["load"]
    assert load["projects_other_platform"] == 1
    assert load["versions_malformed"] == 1
    assert load["versions_after_snapshot"] == 1
    assert load["dependencies_malformed"] == 1
    assert load["self_edges_dropped"] == 1
    assert load["dangling_edges_dropped"] == 1
    assert [v for v, _ in s.packages["a"].versions] == [parse_version("1.0.0")]
    assert {(e.dependent, e.target, e.kind) for e in s.edges} == {("a", "b", RUNTIME), ("b", "a", DEVELOPMENT)}


def test_kind_mapping():
    assert map_kind("runtime") == RUNTIME
    assert map_kind("Development") == DEVELOPMENT
    assert map_kind("runtime", "true") == OPTIONAL
    assert map_kind("optional") == OPTIONAL
    assert map_kind("peer") is None


def test_created_never_after_first_release(tmp_path):
    p = write(tmp_path / "p.csv", PROJECT_HEADER, [project("a", created="2019-01-01")])
    v = write(tmp_path / "v.csv", VERSION_HEADER, [version("a", "1.0.0", "2018-05-05")])
    d = write(tmp_path / "d.csv", DEPENDENCY_HEADER, [])
    s = load_librariesio(p, v, d, date(2020, 1, 12))
    assert s.packages["a"].created_at == date(2018, 5, 5)


def test_latest_version_prefers_release():
    p = pkg("a", ("1.0.0", D), ("2.0.0-rc.1", date(2018, 4, 1)), ("1.1.0", date(2018, 3, 15)))
    assert str(p.latest_version) == "1.1.0"
    only_pre = pkg("b", ("1.0.0-alpha", D), ("1.0.0-beta", date(2018, 4, 1)))
    assert str(only_pre.latest_version) == "1.0.0-beta"


def test_latest_edges_one_per_pair():
    s = snapshot(
        [pkg("a", ("1.0.0", D), ("1.1.0", date(2018, 6, 1))), pkg("t", ("1.0.0", D))],
        [edge("a", "1.0.0", "t", "^1.0.0"), edge("a", "1.1.0", "t", "~1.0.0"),
         edge("a", "1.1.0", "t", "*", DEVELOPMENT)],
    )
    assert [(e.dependent_version, e.constraint_text, e.kind) for e in s.latest_edges] == [
        (parse_version("1.1.0"), "~1.0.0", RUNTIME)]
    with pytest.raises(UnknownPackage):
        s.runtime_dependents("nope")


# ---------------------------------------------------------------- filters


def test_spam_patterns():
    is_spam = spam_matcher()
    assert is_spam("wowdude-13") and is_spam("all-packages-0") and is_spam("neat-999")
    assert not is_spam("wowdude") and not is_spam("my-wowdude-13") and not is_spam("Neat-1")


def test_spam_removed_with_edges():
    targets = [pkg(f"t{i}", ("1.0.0", D)) for i in range(900)]
    spam = pkg("wowdude-13", ("1.0.0", D))
    edges = [edge("wowdude-13", "1.0.0", t.name, "*") for t in targets]
    report = {}
    s = apply_filters(snapshot(targets + [spam], edges), report=report)
    assert "wowdude-13" not in s.packages
    assert s.edges == ()
    assert report["filters"]["spam_edges_removed"] == 900


def test_single_dependent_kept_as_dependent():
    s = apply_filters(snapshot(
        [pkg("a", ("1.0.0", D)), pkg("b", ("1.0.0", D)), pkg("c", ("1.0.0", D)), pkg("lonely", ("1.0.0", D))],
        [edge("a", "1.0.0", "c", "^1.0.0"), edge("b", "1.0.0", "c", "^1.0.0"),
         edge("c", "1.0.0", "lonely", "^1.0.0")],
    ))
    assert s.labeled_population() == ["c"]
    assert "lonely" in s.packages
    assert [e.dependent for e in s.runtime_dependents("lonely")] == ["c"]


def test_filters_fixpoint_and_idempotent():
    clean = snapshot(
        [pkg("a", ("1.0.0", D)), pkg("b", ("1.0.0", D))],
        [edge("a", "1.0.0", "b", "^1.0.0"), edge("b", "1.0.0", "a", "^1.0.0")],
    )
    once = apply_filters(clean)
    assert once.packages == clean.packages and once.edges == clean.edges
    noisy = snapshot(
        [pkg("a", ("1.0.0", D)), pkg("b", ("1.0.0", D)), pkg("neat-1", ("1.0.0", D))],
        [edge("a", "1.0.0", "b", "^1.0.0", DEVELOPMENT), edge("neat-1", "1.0.0", "b", "*"),
         edge("b", "1.0.0", "a", "^1.0.0")],
    )
    f1 = apply_filters(noisy)
    f2 = apply_filters(f1)
    assert f1.packages == f2.packages and f1.edges == f2.edges
    assert [(e.dependent, e.target) for e in f1.edges] == [("b", "a")]


def test_edge_counts_match_raw_recount(tmp_path):
    paths = synthetic_ecosystem(tmp_path, n_packages=120, seed=3)
    s = apply_filters(load_librariesio(paths["projects"], paths["versions"], paths["dependencies"],
                                       date(2020, 1, 12)))
    with open(paths["projects"]) as fh:
        names = {r["Name"] for r in csv.DictReader(fh) if r["Platform"] == "NPM"}
    with open(paths["dependencies"]) as fh:
        rows = list(csv.DictReader(fh))
    keep = Counter()
    seen = set()
    for r in rows:
        a, b = r["Project Name"], r["Dependency Name"]
        key = (a, r["Version Number"], b, r["Dependency Requirements"])
        if (r["Dependency Kind"] == "runtime" and a != b and a in names and b in names
                and not a.startswith("wowdude-") and not b.startswith("wowdude-") and key not in seen):
            seen.add(key)
            keep[b] += 1
    assert len(s.edges) == sum(keep.values())
    got = Counter(e.target for e in s.edges)
    assert got == keep


# ---------------------------------------------------------------- imputation


def test_impute_missing():
    s = snapshot([
        pkg("a", ("1.0.0", D), repo=RepoMetadata(stars=None, size_kb=100, open_issues=2)),
        pkg("b", ("1.0.0", D), repo=RepoMetadata(stars=5, size_kb=200, open_issues=None)),
        pkg("c", ("1.0.0", D), repo=RepoMetadata(stars=1, size_kb=400, open_issues=0)),
        pkg("d", ("1.0.0", D), repo=RepoMetadata(stars=1, size_kb=None, open_issues=0)),
        pkg("e", ("1.0.0", D)),
    ])
    report = {}
    out = impute_missing(s, report)
    assert out.packages["a"].repo.stars == 0
    assert out.packages["b"].repo.open_issues == 0
    assert out.packages["d"].repo.size_kb == 200
    assert out.packages["e"].repo == RepoMetadata(0, 200, 0, False, False)
    assert out.packages["e"].sourcerank == 0
    assert report["imputation"]["stars"] == 2
    assert report["imputation"]["median_size_kb"] == 200


def test_impute_fixpoint():
    full = dict(sourcerank=3, dependent_repositories=1, repo=RepoMetadata(1, 2, 3, True, True))
    s = snapshot([pkg("a", ("1.0.0", D), **full), pkg("b", ("1.0.0", D), **full)])
    assert impute_missing(s).packages == s.packages


# ---------------------------------------------------------------- normalized format


def test_roundtrip_bit_exact(tmp_path):
    paths = synthetic_ecosystem(tmp_path, n_packages=60, seed=1)
    s = load_librariesio(paths["projects"], paths["versions"], paths["dependencies"], date(2020, 1, 12))
    text = dumps_snapshot(s, {"seed": 1})
    f = tmp_path / "eco.ndjson"
    f.write_text(text)
    back = read_snapshot(f)
    assert back.packages == s.packages
    assert back.edges == s.edges
    assert dumps_snapshot(back, {"seed": 1}) == text


def test_read_snapshot_errors(tmp_path):
    f = tmp_path / "bad.ndjson"
    f.write_text('{"record": "package"}\n')
    with pytest.raises(SchemaMismatch):
        read_snapshot(f)
    with pytest.raises(MissingFile):
        read_snapshot(tmp_path / "missing.ndjson")


names = st.sampled_from(["a", "b", "c", "d", "neat-1", "wowdude-2"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(names, names, st.sampled_from([RUNTIME, DEVELOPMENT, OPTIONAL])), max_size=25))
def test_filters_idempotent_property(raw):
    pk = [pkg(n, ("1.0.0", D)) for n in ["a", "b", "c", "d", "neat-1", "wowdude-2"]]
    edges = [edge(a, "1.0.0", b, "^1.0.0", k) for a, b, k in raw if a != b]
    f1 = apply_filters(snapshot(pk, edges))
    f2 = apply_filters(f1)
    assert f1.packages == f2.packages and f1.edges == f2.edges
    assert all(e.kind == RUNTIME for e in f1.edges)
