"""Synthetic data with a known generating rule, for tests, acceptance runs and demos.

Two generators:

* ``planted_features`` draws feature rows directly. The label depends only on
  release status, dependent count and age; every other column is noise.
* ``synthetic_ecosystem`` produces a whole libraries.io-style export (projects,
  versions, dependencies) whose dependents pick constraints by a similar rule,
  with spam packages, dev dependencies, git URLs and dangling edges mixed in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from .features import FEATURE_NAMES

# ---------------------------------------------------------------- planted feature table


def planted_label(release_status: int, dependent_count: int, age_months: int) -> str:
    """Noise-free labeling rule: pre-1.0.0 is permissive, old little-used packages restrictive."""
    if release_status == 0:
        return "permissive"
    if age_months >= 90 and dependent_count < 4:
        return "restrictive"
    return "balanced"


@dataclass
class PlantedTable:
    X: np.ndarray
    labels: list[str]
    feature_names: list[str]
    clean_labels: list[str]


def planted_features(n: int = 2000, seed: int = 0, label_noise: float = 0.05,
                     unspecialized_rate: float = 0.2) -> PlantedTable:
    rng = np.random.default_rng(seed)
    cols = {}
    cols["release_status"] = (rng.random(n) < 0.655).astype(int)
    cols["dependent_count"] = 2 + np.floor(rng.lognormal(0.3, 1.3, n)).astype(int)
    cols["age_months"] = rng.integers(1, 121, n)
    cols["dependency_count"] = rng.poisson(3, n)
    cols["transitive_dependency_count"] = cols["dependency_count"] + rng.poisson(10, n)
    cols["version_frequency"] = rng.gamma(1.5, 0.4, n)
    for flag, p in (("has_description", 0.9), ("has_keywords", 0.7), ("has_homepage", 0.6),
                    ("has_repo_license", 0.7), ("has_repo_readme", 0.8)):
        cols[flag] = (rng.random(n) < p).astype(int)
    cols["license_code"] = rng.integers(0, 12, n)
    cols["sourcerank"] = rng.integers(0, 25, n)
    cols["days_since_last_release"] = rng.integers(0, 2000, n)
    cols["dependent_repositories"] = np.floor(rng.lognormal(1.0, 1.5, n)).astype(int)
    cols["repository_size_kb"] = np.floor(rng.lognormal(6.0, 1.5, n)).astype(int)
    cols["repository_open_issues"] = rng.poisson(4, n)
    cols["repository_stars"] = np.floor(rng.lognormal(2.0, 2.0, n)).astype(int)
    cols["domain"] = rng.integers(1, 11, n)
    X = np.column_stack([cols[name] for name in FEATURE_NAMES]).astype(float)

    clean = [planted_label(int(r), int(d), int(a)) for r, d, a in
             zip(cols["release_status"], cols["dependent_count"], cols["age_months"])]
    labels = list(clean)
    few = cols["dependent_count"] < 5
    coin = rng.random(n)
    flip = rng.random(n)
    pick = rng.integers(0, 4, n)
    classes = ("balanced", "permissive", "restrictive", "unspecialized")
    for i in range(n):
        if few[i] and coin[i] < unspecialized_rate:
            labels[i] = "unspecialized"
        if flip[i] < label_noise:
            labels[i] = classes[pick[i]]
    return PlantedTable(X, labels, list(FEATURE_NAMES), clean)


# ---------------------------------------------------------------- synthetic ecosystem

THEMES = {
    "react": ["react", "component", "ui", "jsx", "hooks", "frontend"],
    "server": ["http", "server", "express", "middleware", "api", "rest"],
    "cli": ["cli", "terminal", "command", "shell", "args", "console"],
    "test": ["test", "mocha", "assert", "spec", "tdd", "mock"],
    "data": ["json", "parse", "yaml", "csv", "data", "schema"],
    "build": ["webpack", "babel", "build", "bundler", "plugin", "loader"],
}
LICENSES = ["MIT", "ISC", "Apache-2.0", "BSD-2-Clause", "BSD-3-Clause", "GPL-3.0", ""]

PROJECT_HEADER = [
    "ID", "Platform", "Name", "Created Timestamp", "Updated Timestamp", "Description", "Keywords",
    "Homepage URL", "Licenses", "Repository URL", "Versions Count", "SourceRank",
    "Latest Release Publish Timestamp", "Latest Release Number", "Dependent Projects Count",
    "Dependent Repositories Count", "Repository ID", "Repository Stars Count", "Repository Size",
    "Repository Open Issues Count", "Repository License", "Repository Readme filename",
]
VERSION_HEADER = ["ID", "Platform", "Project Name", "Project ID", "Number", "Published Timestamp",
                  "Created Timestamp", "Updated Timestamp"]
DEPENDENCY_HEADER = ["ID", "Platform", "Project Name", "Project ID", "Version Number", "Version ID",
                     "Dependency Name", "Dependency Platform", "Dependency Kind", "Optional Dependency",
                     "Dependency Requirements", "Dependency Project ID"]


def _ts(d: date) -> str:
    return f"{d.isoformat()} 12:00:00 UTC"


@dataclass
class _Pkg:
    name: str
    created: date
    releases: list  # (version tuple, date)
    keywords: list
    license: str
    targets: list


def _constraint(rng, target_version: tuple, target_age_months: int) -> str:
    M, m, p = target_version
    u = rng.random()
    if M >= 1:
        if target_age_months < 45:
            if u < 0.85:
                return f"^{M}.{m}.{p}"
            return f"~{M}.{m}.{p}" if u < 0.92 else "*"
        if u < 0.45:
            return f"^{M}.{m}.{p}"
        return f"~{M}.{m}.{p}" if u < 0.75 else f">={M}.{m}.{p}"
    if u < 0.7:
        return f"^{M}.{m}.{p}"
    return f"{M}.{m}.{p}" if u < 0.85 else "*"


def _latest_at(pkg: _Pkg, when: date) -> Optional[tuple]:
    best = None
    for v, d in pkg.releases:
        if d <= when:
            best = v
    return best


def synthetic_ecosystem(out_dir: Path, n_packages: int = 300, seed: int = 0,
                        snapshot: date = date(2020, 1, 12)) -> dict[str, Path]:
    """Write projects.csv, versions.csv and dependencies.csv under ``out_dir``."""
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = date(2010, 1, 1)
    span = (snapshot - start).days - 60
    theme_names = sorted(THEMES)
    pkgs: list[_Pkg] = []
    for i in range(n_packages):
        created = start + timedelta(days=int(span * rng.random() ** 0.8))
        n_rel = 1 + int(rng.poisson(5))
        gaps = np.sort(rng.random(n_rel)) * max(1, (snapshot - created).days - 1)
        goes_stable = rng.random() < 0.6
        stable_at = int(rng.integers(0, n_rel)) if goes_stable else n_rel + 1
        v = [0, 1, 0]
        releases = []
        for r in range(n_rel):
            if r == stable_at and v[0] == 0:
                v = [1, 0, 0]
            elif r > 0:
                u = rng.random()
                if u < 0.08 and v[0] >= 1:
                    v = [v[0] + 1, 0, 0]
                elif u < 0.4:
                    v = [v[0], v[1] + 1, 0]
                else:
                    v = [v[0], v[1], v[2] + 1]
            releases.append((tuple(v), created + timedelta(days=int(gaps[r]))))
        theme = THEMES[theme_names[int(rng.integers(len(theme_names)))]]
        k = int(rng.integers(0, 5))
        keywords = list(rng.choice(theme, size=min(k, len(theme)), replace=False)) if k else []
        pkgs.append(_Pkg(f"pkg-{i:04d}", created, releases, keywords,
                         LICENSES[int(rng.integers(len(LICENSES)))], []))

    pkgs.sort(key=lambda p: p.created)
    popularity = rng.pareto(1.2, len(pkgs)) + 0.1
    for i, p in enumerate(pkgs):
        if i == 0:
            continue
        w = popularity[:i] / popularity[:i].sum()
        n_dep = min(i, int(rng.integers(0, 5)))
        if n_dep:
            p.targets = [pkgs[j].name for j in rng.choice(i, size=n_dep, replace=False, p=w)]
    by_name = {p.name: p for p in pkgs}

    proj_rows, ver_rows, dep_rows = [], [], []
    vid = 0
    for pid, p in enumerate(sorted(pkgs, key=lambda q: q.name), 1):
        has_repo = rng.random() < 0.8
        latest_v, latest_d = p.releases[-1]
        proj_rows.append([
            pid, "NPM", p.name, _ts(p.created), _ts(latest_d),
            "A package" if rng.random() < 0.9 else "", ",".join(p.keywords),
            f"https://example.org/{p.name}" if rng.random() < 0.6 else "", p.license,
            f"https://github.com/ex/{p.name}" if has_repo else "", len(p.releases),
            int(rng.integers(0, 25)), _ts(latest_d), ".".join(map(str, latest_v)), 0,
            int(rng.lognormal(1.0, 1.5)) if rng.random() < 0.9 else "",
            pid if has_repo else "",
            (int(rng.lognormal(2.0, 2.0)) if rng.random() < 0.9 else "") if has_repo else "",
            (int(rng.lognormal(6.0, 1.5)) if rng.random() < 0.85 else "") if has_repo else "",
            int(rng.poisson(4)) if has_repo else "",
            ("MIT" if rng.random() < 0.7 else "") if has_repo else "",
            ("README.md" if rng.random() < 0.8 else "") if has_repo else "",
        ])
        for v, d in p.releases:
            vid += 1
            vs = ".".join(map(str, v))
            ver_rows.append([vid, "NPM", p.name, pid, vs, _ts(d), _ts(d), _ts(d)])
            for t in p.targets:
                tgt = by_name[t]
                tv = _latest_at(tgt, d)
                if tv is None:
                    continue
                age = (d.year - tgt.created.year) * 12 + d.month - tgt.created.month
                req = _constraint(rng, tv, age)
                if rng.random() < 0.01:
                    req = f"git+https://github.com/ex/{t}.git"
                dep_rows.append([len(dep_rows) + 1, "NPM", p.name, pid, vs, vid, t, "NPM",
                                 "runtime", "false", req, ""])
            if rng.random() < 0.3:
                dep_rows.append([len(dep_rows) + 1, "NPM", p.name, pid, vs, vid, pkgs[0].name, "NPM",
                                 "Development", "false", "^1.0.0", ""])

    # noise the filters must remove
    spam_pid = len(proj_rows) + 1
    proj_rows.append([spam_pid, "NPM", "wowdude-13", _ts(date(2019, 6, 1)), _ts(date(2019, 6, 1)),
                      "", "", "", "", "", 1, 0, _ts(date(2019, 6, 1)), "1.0.0", 0, "", "", "", "", "", "", ""])
    vid += 1
    ver_rows.append([vid, "NPM", "wowdude-13", spam_pid, "1.0.0", _ts(date(2019, 6, 1)),
                     _ts(date(2019, 6, 1)), _ts(date(2019, 6, 1))])
    for p in pkgs:
        dep_rows.append([len(dep_rows) + 1, "NPM", "wowdude-13", spam_pid, "1.0.0", vid, p.name,
                         "NPM", "runtime", "false", "*", ""])
    last = sorted(pkgs, key=lambda q: q.name)[-1]
    lv = ".".join(map(str, last.releases[-1][0]))
    dep_rows.append([len(dep_rows) + 1, "NPM", last.name, "", lv, "", "no-such-package", "NPM",
                     "runtime", "false", "^1.0.0", ""])
    dep_rows.append([len(dep_rows) + 1, "NPM", last.name, "", lv, "", last.name, "NPM",
                     "runtime", "false", "^1.0.0", ""])
    proj_rows.append([spam_pid + 1, "Pypi", "requests", _ts(date(2011, 1, 1)), "", "", "", "", "",
                      "", 1, 0, "", "", 0, "", "", "", "", "", "", ""])

    paths = {"projects": out_dir / "projects.csv", "versions": out_dir / "versions.csv",
             "dependencies": out_dir / "dependencies.csv"}
    for key, header, rows in (("projects", PROJECT_HEADER, proj_rows),
                              ("versions", VERSION_HEADER, ver_rows),
                              ("dependencies", DEPENDENCY_HEADER, dep_rows)):
        with open(paths[key], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    return paths
