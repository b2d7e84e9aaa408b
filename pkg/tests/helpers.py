"""Small builders for in-memory snapshots."""

from __future__ import annotations

from datetime import date

from depstrat.ingest import RUNTIME, DependencyEdge, EcosystemSnapshot, PackageRecord, RepoMetadata
from depstrat.semver import parse_version

SNAP = date(2020, 1, 12)


def pkg(name: str, *versions: tuple[str, date], keywords=(), created=None, **kw) -> PackageRecord:
    vs = tuple(sorted(((parse_version(v), d) for v, d in versions), key=lambda t: (t[1], t[0]._key())))
    return PackageRecord(name, created or vs[0][1], vs, tuple(keywords), **kw)


def edge(dependent: str, version: str, target: str, constraint: str, kind: str = RUNTIME) -> DependencyEdge:
    return DependencyEdge(dependent, parse_version(version), target, constraint, kind)


def snapshot(packages, edges=(), when: date = SNAP) -> EcosystemSnapshot:
    return EcosystemSnapshot(when, {p.name: p for p in packages}, tuple(edges))


def star(target: str, constraints, target_versions=("1.0.0",), when: date = SNAP) -> EcosystemSnapshot:
    """One target, one dependent per constraint, each with a single release 1.0.0."""
    d0 = date(2018, 1, 1)
    packages = [pkg(target, *[(v, d0) for v in target_versions], repo=RepoMetadata())]
    edges = []
    for i, c in enumerate(constraints):
        name = f"dep-{i:03d}"
        packages.append(pkg(name, ("1.0.0", d0)))
        edges.append(edge(name, "1.0.0", target, c))
    return snapshot(packages, edges, when)


# ---------------------------------------------------------------- ten-year history
#
# Target "lib": 0.1.0 (2010-01), 0.5.0 (2012-06), 1.0.0 (2015-01-05), 1.4.0 (2017-03).
# Dependents and the constraint each release declares on lib:
#   d1..d4  2010-03-10 ^0.1.0 (P)     2015-01-20 ^1.0.0 (B)
#   d5      2011-07-10 two releases the same day: 1.0.0 "0.1.0" (B), 1.0.1 "*" (P); latest wins
#   d6, d7  2013-05-02 ~0.5.0 (P)     2015-02-14 ^1.0.0 (B)
#   d8      2016-04-30 ~1.0.0 (R)     2018-09-01 drops lib
#   d9      2017-08-15 1.4.0 (R)
#   d10     2014-11-03 0.5.0 (B)      2015-01-25 ^1.0.0 (B)

TEN_YEAR_TALLIES = [  # (first month, last month, balanced, restrictive, permissive), worked by hand
    ("2010-01", "2010-02", 0, 0, 0),
    ("2010-03", "2011-06", 0, 0, 4),
    ("2011-07", "2013-04", 0, 0, 5),
    ("2013-05", "2014-10", 0, 0, 7),
    ("2014-11", "2014-12", 1, 0, 7),
    ("2015-01", "2015-01", 5, 0, 3),
    ("2015-02", "2016-03", 7, 0, 1),
    ("2016-04", "2017-07", 7, 1, 1),
    ("2017-08", "2018-08", 7, 2, 1),
    ("2018-09", "2019-12", 7, 1, 1),
]


def ten_year_history() -> EcosystemSnapshot:
    packages = [pkg("lib", ("0.1.0", date(2010, 1, 4)), ("0.5.0", date(2012, 6, 1)),
                    ("1.0.0", date(2015, 1, 5)), ("1.4.0", date(2017, 3, 9)))]
    edges = []

    def dependent(name, *releases):
        packages.append(pkg(name, *[(v, d) for v, d, _ in releases]))
        for v, _, c in releases:
            if c is not None:
                edges.append(edge(name, v, "lib", c))

    for i in range(1, 5):
        dependent(f"d{i}", ("1.0.0", date(2010, 3, 10), "^0.1.0"), ("2.0.0", date(2015, 1, 20), "^1.0.0"))
    dependent("d5", ("1.0.0", date(2011, 7, 10), "0.1.0"), ("1.0.1", date(2011, 7, 10), "*"))
    for n in ("d6", "d7"):
        dependent(n, ("0.1.0", date(2013, 5, 2), "~0.5.0"), ("0.2.0", date(2015, 2, 14), "^1.0.0"))
    dependent("d8", ("1.0.0", date(2016, 4, 30), "~1.0.0"), ("2.0.0", date(2018, 9, 1), None))
    dependent("d9", ("1.0.0", date(2017, 8, 15), "1.4.0"))
    dependent("d10", ("3.0.0", date(2014, 11, 3), "0.5.0"), ("3.1.0", date(2015, 1, 25), "^1.0.0"))
    return snapshot(packages, edges)
