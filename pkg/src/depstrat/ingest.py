"""Ecosystem snapshots: libraries.io CSV ingestion, normalized NDJSON I/O, filters, imputation."""

from __future__ import annotations

import csv
import json
import logging
import re
import statistics
from collections import Counter
from dataclasses import dataclass, replace
from datetime import date, datetime
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .semver import ConstraintError, Version, parse_version

log = logging.getLogger(__name__)

FORMAT_NAME = "depstrat-ecosystem"
FORMAT_VERSION = 1

RUNTIME, DEVELOPMENT, OPTIONAL = "runtime", "development", "optional"
_KIND_RANK = {RUNTIME: 0, OPTIONAL: 1, DEVELOPMENT: 2}

DEFAULT_SPAM_PATTERNS = (r"all-packages-\d+", r"wowdude-\d+", r"neat-\d+")

csv.field_size_limit(2**31 - 1)


class InputError(Exception):
    """Bad input data or configuration (CLI exit status 2)."""


class MissingFile(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class UnknownPackage(InputError, KeyError):
    def __str__(self) -> str:
        return f"unknown package: {self.args[0]!r}" if self.args else "unknown package"


@dataclass(frozen=True)
class RepoMetadata:
    stars: Optional[int] = None
    size_kb: Optional[int] = None
    open_issues: Optional[int] = None
    has_license_file: bool = False
    has_readme: bool = False


@dataclass(frozen=True)
class PackageRecord:
    name: str
    created_at: date
    versions: tuple[tuple[Version, date], ...]
    keywords: tuple[str, ...] = ()
    has_description: bool = False
    has_homepage: bool = False
    license_text: str = ""
    sourcerank: Optional[int] = None
    repo: Optional[RepoMetadata] = None
    dependent_repositories: Optional[int] = None

    @cached_property
    def latest_version(self) -> Version:
        releases = [v for v, _ in self.versions if not v.prerelease]
        return max(releases or [v for v, _ in self.versions])

    @property
    def last_published(self) -> date:
        return max(d for _, d in self.versions)


@dataclass(frozen=True)
class DependencyEdge:
    dependent: str
    dependent_version: Version
    target: str
    constraint_text: str
    kind: str = RUNTIME


@dataclass
class EcosystemSnapshot:
    snapshot_date: date
    packages: dict[str, PackageRecord]
    edges: tuple[DependencyEdge, ...] = ()

    @cached_property
    def latest_edges(self) -> tuple[DependencyEdge, ...]:
        """Edges declared by each dependent's latest version, one per (dependent, target)."""
        best: dict[tuple[str, str], DependencyEdge] = {}
        for e in self.edges:
            pkg = self.packages.get(e.dependent)
            if pkg is None or e.dependent_version != pkg.latest_version:
                continue
            key = (e.dependent, e.target)
            cur = best.get(key)
            if cur is None or _KIND_RANK[e.kind] < _KIND_RANK[cur.kind]:
                best[key] = e
        return tuple(best[k] for k in sorted(best))

    @cached_property
    def dependents_index(self) -> dict[str, tuple[DependencyEdge, ...]]:
        """target -> latest runtime edges pointing at it."""
        idx: dict[str, list[DependencyEdge]] = {}
        for e in self.latest_edges:
            if e.kind == RUNTIME:
                idx.setdefault(e.target, []).append(e)
        return {k: tuple(v) for k, v in idx.items()}

    def runtime_dependents(self, name: str) -> tuple[DependencyEdge, ...]:
        if name not in self.packages:
            raise UnknownPackage(name)
        return self.dependents_index.get(name, ())

    def labeled_population(self, min_dependents: int = 2) -> list[str]:
        return sorted(
            name for name, edges in self.dependents_index.items()
            if len(edges) >= min_dependents and name in self.packages
        )


# ---------------------------------------------------------------- helpers


def _norm_header(h: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", h.strip().lower()).strip("_")


def _parse_date(text: str) -> Optional[date]:
    s = (text or "").strip()
    if not s:
        return None
    s = s.replace(" UTC", "").replace("Z", "").strip()
    try:
        return datetime.fromisoformat(s).date()
    except ValueError:
        try:
            return date.fromisoformat(s[:10])
        except ValueError:
            return None


def _parse_int(text: Optional[str]) -> Optional[int]:
    s = (text or "").strip()
    if not s:
        return None
    try:
        return int(float(s))
    except ValueError:
        return None


def _truthy(text: Optional[str]) -> bool:
    return (text or "").strip().lower() in ("true", "t", "1", "yes")


def _open_csv(path: Path, required: Iterable[str]) -> Iterator[dict[str, str]]:
    if not Path(path).is_file():
        raise MissingFile(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.reader(fh)
        try:
            header = [_norm_header(h) for h in next(reader)]
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaMismatch(f"{path}: missing required column(s) {missing}")
        for row in reader:
            yield dict(zip(header, row))


def map_kind(raw: str, optional_flag: str = "") -> Optional[str]:
    k = (raw or "").strip().lower()
    if _truthy(optional_flag) or k in ("optional", "optionaldependencies"):
        return OPTIONAL
    if k in ("runtime", "normal", "dependencies", "dependency", "compile", "run"):
        return RUNTIME
    if k in ("development", "dev", "devdependencies"):
        return DEVELOPMENT
    return None


# ---------------------------------------------------------------- libraries.io CSV


PROJECT_COLUMNS = ("platform", "name", "created_timestamp")
VERSION_COLUMNS = ("platform", "project_name", "number", "published_timestamp")
DEPENDENCY_COLUMNS = (
    "platform", "project_name", "version_number",
    "dependency_name", "dependency_kind", "dependency_requirements",
)
_REPO_FIELDS = (
    "repository_stars_count", "repository_size", "repository_open_issues_count",
    "repository_license", "repository_readme_filename", "repository_url", "repository_id",
)


def load_librariesio(
    projects_csv: Path,
    versions_csv: Path,
    dependencies_csv: Path,
    snapshot_date: date,
    platform: str = "NPM",
    report: Optional[dict] = None,
) -> EcosystemSnapshot:
    """Load a libraries.io open-data export into a snapshot restricted to ``platform``.

    ``projects_csv`` may be the plain projects file or the
    projects-with-repository-fields variant; repository columns are optional.
    Malformed rows are counted in ``report`` and skipped.
    """
    rep = report if report is not None else {}
    counts: Counter = Counter()
    plat = platform.lower()

    projects: dict[str, dict] = {}
    for row in _open_csv(projects_csv, PROJECT_COLUMNS):
        counts["projects_rows"] += 1
        if row.get("platform", "").strip().lower() != plat:
            counts["projects_other_platform"] += 1
            continue
        name = row.get("name", "").strip()
        if not name:
            counts["projects_malformed"] += 1
            continue
        projects[name] = row

    versions: dict[str, dict[Version, date]] = {}
    for row in _open_csv(versions_csv, VERSION_COLUMNS):
        counts["versions_rows"] += 1
        if row.get("platform", "").strip().lower() != plat:
            counts["versions_other_platform"] += 1
            continue
        name = row["project_name"].strip()
        published = _parse_date(row["published_timestamp"]) or _parse_date(row.get("created_timestamp", ""))
        try:
            v = parse_version(row["number"])
        except ConstraintError:
            counts["versions_malformed"] += 1
            continue
        if published is None:
            counts["versions_malformed"] += 1
            continue
        if published > snapshot_date:
            counts["versions_after_snapshot"] += 1
            continue
        if name not in projects:
            counts["versions_unknown_project"] += 1
            continue
        versions.setdefault(name, {})[v] = published

    packages: dict[str, PackageRecord] = {}
    for name in sorted(projects):
        vs = versions.get(name)
        if not vs:
            counts["packages_without_versions"] += 1
            continue
        row = projects[name]
        packages[name] = _record_from_row(name, row, vs, counts)

    edges: list[DependencyEdge] = []
    for row in _open_csv(dependencies_csv, DEPENDENCY_COLUMNS):
        counts["dependencies_rows"] += 1
        if row.get("platform", "").strip().lower() != plat:
            counts["dependencies_other_platform"] += 1
            continue
        dep_plat = row.get("dependency_platform", "").strip().lower()
        if dep_plat and dep_plat != plat:
            counts["dependencies_other_platform"] += 1
            continue
        kind = map_kind(row["dependency_kind"], row.get("optional_dependency", ""))
        dependent = row["project_name"].strip()
        target = row["dependency_name"].strip()
        try:
            dv = parse_version(row["version_number"])
        except ConstraintError:
            counts["dependencies_malformed"] += 1
            continue
        if kind is None or not target:
            counts["dependencies_malformed"] += 1
            continue
        if dependent == target:
            counts["self_edges_dropped"] += 1
            continue
        if dependent not in packages or target not in packages or dv not in versions[dependent]:
            counts["dangling_edges_dropped"] += 1
            continue
        edges.append(DependencyEdge(dependent, dv, target, row["dependency_requirements"].strip(), kind))

    if counts["self_edges_dropped"]:
        log.info("dropped %d self-edges", counts["self_edges_dropped"])
    if counts["dangling_edges_dropped"]:
        log.info("dropped %d dangling edges", counts["dangling_edges_dropped"])
    rep.setdefault("load", {}).update(sorted(counts.items()))
    return EcosystemSnapshot(snapshot_date, packages, _sorted_edges(edges))


def _record_from_row(name: str, row: dict, vs: dict[Version, date], counts: Counter) -> PackageRecord:
    hist = tuple(sorted(vs.items(), key=lambda kv: (kv[1], kv[0]._key())))
    first = hist[0][1]
    created = _parse_date(row.get("created_timestamp", "")) or first
    if created > first:
        counts["created_after_first_release_clamped"] += 1
        created = first
    keywords = tuple(dict.fromkeys(k.strip() for k in row.get("keywords", "").split(",") if k.strip()))
    repo = None
    if any((row.get(f) or "").strip() for f in _REPO_FIELDS):
        repo = RepoMetadata(
            stars=_parse_int(row.get("repository_stars_count")),
            size_kb=_parse_int(row.get("repository_size")),
            open_issues=_parse_int(row.get("repository_open_issues_count")),
            has_license_file=bool((row.get("repository_license") or "").strip()),
            has_readme=bool((row.get("repository_readme_filename") or "").strip()),
        )
    return PackageRecord(
        name=name,
        created_at=created,
        versions=hist,
        keywords=keywords,
        has_description=bool((row.get("description") or "").strip()),
        has_homepage=bool((row.get("homepage_url") or "").strip()),
        license_text=(row.get("licenses") or "").strip(),
        sourcerank=_parse_int(row.get("sourcerank")),
        repo=repo,
        dependent_repositories=_parse_int(row.get("dependent_repositories_count")),
    )


def _sorted_edges(edges: Iterable[DependencyEdge]) -> tuple[DependencyEdge, ...]:
    return tuple(sorted(
        set(edges),
        key=lambda e: (e.dependent, e.dependent_version._key(), e.target, e.kind, e.constraint_text),
    ))


# ---------------------------------------------------------------- filters / imputation


def spam_matcher(patterns: Iterable[str] = DEFAULT_SPAM_PATTERNS):
    rx = re.compile("|".join(f"(?:{p})" for p in patterns))
    return lambda name: rx.fullmatch(name) is not None


def load_denylist(path: Path) -> tuple[str, ...]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return tuple(ln.strip() for ln in lines if ln.strip() and not ln.startswith("#"))


def apply_filters(
    s: EcosystemSnapshot,
    spam_patterns: Iterable[str] = DEFAULT_SPAM_PATTERNS,
    report: Optional[dict] = None,
) -> EcosystemSnapshot:
    """Drop non-runtime edges and spam packages (with every edge touching them).

    The fewer-than-two-dependents rule is not applied here: such packages stay
    in the snapshot as dependents and are left out by ``labeled_population``.
    """
    is_spam = spam_matcher(spam_patterns)
    spam = {n for n in s.packages if is_spam(n)}
    kept = []
    non_runtime = spam_edges = 0
    for e in s.edges:
        if e.dependent in spam or e.target in spam:
            spam_edges += 1
        elif e.kind != RUNTIME:
            non_runtime += 1
        else:
            kept.append(e)
    if spam:
        log.info("removed %d spam packages with %d edges", len(spam), spam_edges)
    if report is not None:
        report.setdefault("filters", {}).update(
            spam_packages_removed=len(spam),
            spam_edges_removed=spam_edges,
            non_runtime_edges_removed=non_runtime,
        )
    packages = {n: p for n, p in s.packages.items() if n not in spam}
    return EcosystemSnapshot(s.snapshot_date, packages, tuple(kept))


def impute_missing(s: EcosystemSnapshot, report: Optional[dict] = None) -> EcosystemSnapshot:
    """Fill missing counts: zero for stars/issues/sourcerank/dependent repos, median for repo size."""
    sizes = [p.repo.size_kb for p in s.packages.values() if p.repo and p.repo.size_kb is not None]
    median_size = int(statistics.median(sizes)) if sizes else 0
    counts: Counter = Counter()
    out: dict[str, PackageRecord] = {}
    for name, p in s.packages.items():
        repo = p.repo or RepoMetadata()
        if p.repo is None:
            counts["repo_missing"] += 1
        changes = {}
        if repo.stars is None:
            counts["stars"] += 1
            changes["stars"] = 0
        if repo.open_issues is None:
            counts["open_issues"] += 1
            changes["open_issues"] = 0
        if repo.size_kb is None:
            counts["size_kb"] += 1
            changes["size_kb"] = median_size
        top = {}
        if p.sourcerank is None:
            counts["sourcerank"] += 1
            top["sourcerank"] = 0
        if p.dependent_repositories is None:
            counts["dependent_repositories"] += 1
            top["dependent_repositories"] = 0
        if changes or p.repo is None:
            top["repo"] = replace(repo, **changes)
        out[name] = replace(p, **top) if top else p
    if report is not None:
        report.setdefault("imputation", {}).update(
            {k: counts[k] for k in ("stars", "open_issues", "size_kb", "sourcerank",
                                    "dependent_repositories", "repo_missing")},
            median_size_kb=median_size,
        )
    return EcosystemSnapshot(s.snapshot_date, out, s.edges)


# ---------------------------------------------------------------- normalized NDJSON


def _vstr(v: Version) -> str:
    return f"{v}+{v.build}" if v.build else str(v)


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _package_obj(p: PackageRecord) -> dict:
    return {
        "record": "package",
        "name": p.name,
        "created_at": p.created_at.isoformat(),
        "versions": [[_vstr(v), d.isoformat()] for v, d in p.versions],
        "keywords": list(p.keywords),
        "has_description": p.has_description,
        "has_homepage": p.has_homepage,
        "license": p.license_text,
        "sourcerank": p.sourcerank,
        "dependent_repositories": p.dependent_repositories,
        "repo": None if p.repo is None else {
            "stars": p.repo.stars,
            "size_kb": p.repo.size_kb,
            "open_issues": p.repo.open_issues,
            "has_license_file": p.repo.has_license_file,
            "has_readme": p.repo.has_readme,
        },
    }


def iter_ndjson_lines(s: EcosystemSnapshot, provenance: Optional[dict] = None) -> Iterator[str]:
    header = {"record": "snapshot", "format": FORMAT_NAME, "version": FORMAT_VERSION,
              "snapshot_date": s.snapshot_date.isoformat()}
    if provenance:
        header["provenance"] = provenance
    yield _dumps(header)
    for name in sorted(s.packages):
        yield _dumps(_package_obj(s.packages[name]))
    for e in _sorted_edges(s.edges):
        yield _dumps({"record": "edge", "dependent": e.dependent,
                      "dependent_version": _vstr(e.dependent_version), "target": e.target,
                      "constraint": e.constraint_text, "kind": e.kind})


def dumps_snapshot(s: EcosystemSnapshot, provenance: Optional[dict] = None) -> str:
    return "".join(line + "\n" for line in iter_ndjson_lines(s, provenance))


def read_snapshot(path: Path) -> EcosystemSnapshot:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"missing input file: {path}")
    packages: dict[str, PackageRecord] = {}
    edges: list[DependencyEdge] = []
    snapshot_date = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                kind = obj["record"]
                if kind == "snapshot":
                    if obj.get("format") != FORMAT_NAME:
                        raise SchemaMismatch(f"{path}: not a {FORMAT_NAME} file")
                    snapshot_date = date.fromisoformat(obj["snapshot_date"])
                elif kind == "package":
                    packages[obj["name"]] = _package_from_obj(obj)
                elif kind == "edge":
                    edges.append(DependencyEdge(
                        obj["dependent"], parse_version(obj["dependent_version"]),
                        obj["target"], obj["constraint"], obj["kind"]))
            except (KeyError, ValueError, TypeError) as exc:
                raise SchemaMismatch(f"{path}:{lineno}: {exc}") from exc
    if snapshot_date is None:
        raise SchemaMismatch(f"{path}: missing snapshot header")
    return EcosystemSnapshot(snapshot_date, packages, tuple(edges))


def _package_from_obj(obj: dict) -> PackageRecord:
    r = obj.get("repo")
    return PackageRecord(
        name=obj["name"],
        created_at=date.fromisoformat(obj["created_at"]),
        versions=tuple((parse_version(v), date.fromisoformat(d)) for v, d in obj["versions"]),
        keywords=tuple(obj.get("keywords", ())),
        has_description=bool(obj.get("has_description")),
        has_homepage=bool(obj.get("has_homepage")),
        license_text=obj.get("license", ""),
        sourcerank=obj.get("sourcerank"),
        dependent_repositories=obj.get("dependent_repositories"),
        repo=None if r is None else RepoMetadata(
            r.get("stars"), r.get("size_kb"), r.get("open_issues"),
            bool(r.get("has_license_file")), bool(r.get("has_readme"))),
    )
