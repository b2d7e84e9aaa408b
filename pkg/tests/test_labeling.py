import random
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depstrat.ingest import DEVELOPMENT, UnknownPackage
from depstrat.labeling import (
    InsufficientDependents, StrategyDistribution, class_shares, label, label_all, labels_to_rows,
    relabel, strategy_distribution, threshold_sweep,
)
from depstrat.semver import UpdateStrategy
from golden import GOLDEN
from helpers import edge, pkg, snapshot, star
from oracles import brute_labels

B, R, P = UpdateStrategy.BALANCED, UpdateStrategy.RESTRICTIVE, UpdateStrategy.PERMISSIVE


def dist(b=0, r=0, p=0, excluded=0):
    return StrategyDistribution({B: b, R: r, P: p}, excluded)


def test_distribution_per_edge():
    d = strategy_distribution(star("t", ["^1.0.0", "^2.1.0", "~1.0.0"]), "t")
    assert (d.counts[B], d.counts[R], d.counts[P], d.total) == (2, 1, 0, 3)
    d = strategy_distribution(star("t", ["*", "latest"]), "t")
    assert (d.counts[P], d.total) == (2, 2)
    d = strategy_distribution(star("t", ["^1.0.0", "git+https://x/y.git", "~1.0.0"]), "t")
    assert (d.excluded, d.total) == (1, 2)
    with pytest.raises(UnknownPackage):
        strategy_distribution(star("t", ["*"]), "nope")


def test_label_rules():
    lab = label(dist(b=2, p=1))
    assert lab.value == "balanced" and lab.agreement == pytest.approx(2 / 3)
    tie = label(dist(b=1, p=1))
    assert tie.value == "unspecialized" and tie.agreement == 0.5
    with pytest.raises(InsufficientDependents):
        label(dist(b=1, excluded=5))


def test_ten_balanced():
    labels = label_all(star("t", ["^1.0.0"] * 10))
    assert labels["t"].value == "balanced" and labels["t"].agreement == 1.0


def test_all_excluded_drops_out():
    s = star("t", ["git+https://a/b.git", "file:../t", "^1.0.0"])
    assert "t" not in label_all(s)


def test_dev_edges_not_counted():
    d0 = date(2018, 1, 1)
    s = snapshot([pkg("t", ("1.0.0", d0)), pkg("a", ("1.0.0", d0)), pkg("b", ("1.0.0", d0))],
                 [edge("a", "1.0.0", "t", "*", DEVELOPMENT), edge("b", "1.0.0", "t", "*")])
    assert label_all(s) == {}


def test_threshold_flip():
    s = star("t", ["^1.0.0"] * 3 + ["*"] * 2)
    assert label_all(s, 0.5)["t"].value == "balanced"
    assert label_all(s, 0.95)["t"].value == "unspecialized"


def test_sweep_rows():
    s = snapshot(*_merge([star("t1", ["^1.0.0"] * 3 + ["*"] * 2), star("t2", ["*"] * 4)]))
    rows = threshold_sweep(label_all(s))
    assert [r["threshold"] for r in rows] == [0.5, 0.75, 0.90, 0.95]
    assert rows[0]["balanced"] == 0.5 and rows[0]["permissive"] == 0.5
    assert rows[1]["unspecialized"] == 0.5
    for r in rows:
        assert sum(r[c] for c in ("balanced", "restrictive", "permissive", "unspecialized")) == pytest.approx(1)


def _merge(snaps):
    # dependents are renamed per star to keep them distinct
    out_pk, out_e = [], []
    for i, s in enumerate(snaps):
        for n, p in s.packages.items():
            name = n if not n.startswith("dep-") else f"{n}-{i}"
            out_pk.append(pkg(name, *[(str(v), d) for v, d in p.versions]))
        for e in s.edges:
            out_e.append(edge(f"{e.dependent}-{i}", str(e.dependent_version), e.target, e.constraint_text))
    return out_pk, out_e


def test_rows_columns():
    rows = labels_to_rows(label_all(star("t", ["^1.0.0", "^1.0.0", "git+ssh://x"])))
    assert rows == [{"package": "t", "label": "balanced", "agreement": 1.0, "n_dependents": 2, "n_excluded": 1}]


# ---------------------------------------------------------------- oracle and properties

STRATEGY_OF = {r: s for r, s, _ in GOLDEN}
STRATEGY_OF.update({"git+https://example.org/x.git": None, "github:a/b": None, "next": None})
POOL = sorted(STRATEGY_OF)


def random_fixture(seed: int, n_pkgs: int = 40, max_edges: int = 1000):
    rng = random.Random(seed)
    names = [f"p{i:02d}" for i in range(n_pkgs)]
    versions = {n: [f"1.{k}.0" for k in range(rng.randint(1, 3))] for n in names}
    packages = [pkg(n, *[(v, date(2017, 1, 1 + i)) for i, v in enumerate(versions[n])]) for n in names]
    raw = []
    for _ in range(rng.randint(1, max_edges)):
        a, b = rng.sample(names, 2)
        raw.append((a, rng.choice(versions[a]), b, rng.choice(POOL)))
    # one constraint per (dependent version, target)
    dedup = {}
    for a, v, b, c in raw:
        dedup[(a, v, b)] = c
    rows = [(a, v, b, c) for (a, v, b), c in sorted(dedup.items())]
    s = snapshot(packages, [edge(a, v, b, c) for a, v, b, c in rows])
    latest = {n: versions[n][-1] for n in names}
    return s, latest, rows


@pytest.mark.parametrize("seed", range(8))
def test_labels_match_brute_tally(seed):
    s, latest, rows = random_fixture(seed)
    assert len(rows) <= 1000
    for threshold in (0.5, 0.75):
        got = {n: (lab.value, lab.agreement) for n, lab in label_all(s, threshold).items()}
        want = brute_labels(latest, rows, STRATEGY_OF, threshold)
        assert got.keys() == want.keys()
        for n in got:
            assert got[n][0] == want[n][0]
            assert got[n][1] == pytest.approx(want[n][1], abs=1e-12)


counts = st.integers(0, 30)


@given(counts, counts, counts, st.floats(0.5, 0.99), st.floats(0.5, 0.99))
def test_threshold_monotone(b, r, p, t1, t2):
    if b + r + p < 2:
        return
    lo, hi = sorted((t1, t2))
    d = dist(b, r, p)
    if label(d, lo).value == "unspecialized":
        assert label(d, hi).value == "unspecialized"
    lab = label(d, lo)
    if lab.value != "unspecialized":
        assert lab.agreement > lo


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(POOL), min_size=2, max_size=12), st.randoms())
def test_dependent_order_irrelevant(constraints, rnd):
    a = label_all(star("t", constraints))
    shuffled = list(constraints)
    rnd.shuffle(shuffled)
    b = label_all(star("t", shuffled))
    assert {k: (v.value, v.agreement) for k, v in a.items()} == {k: (v.value, v.agreement) for k, v in b.items()}


def test_relabel_and_shares():
    labels = label_all(star("t", ["^1.0.0"] * 3 + ["~1.0.0"] * 2))
    assert relabel(labels, 0.75)["t"].value == "unspecialized"
    assert class_shares(labels)["balanced"] == 1.0
