"""npm-style version constraints: parsing, interval normalization, strategy classification.

A range expression is normalized into two sorted, disjoint interval lists:

* ``intervals`` hold release versions only, as half-open ``[lower, upper)``
  spans with release bounds (``upper`` of ``None`` is unbounded);
* ``prerelease_intervals`` hold the prerelease versions the range admits.
  Following npm, a prerelease is admitted only when a comparator in the same
  comparator set carries a prerelease tag on the same major.minor.patch.

Keeping the two apart makes membership exact without sampling.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional


class ConstraintError(ValueError):
    """Base class for version / range errors."""


class MalformedVersion(ConstraintError):
    pass


class MalformedRange(ConstraintError):
    pass


class UnsupportedConstraint(ConstraintError):
    """Non-registry source (git, file, url, alias) or an unsupported dist-tag."""


class EmptyRange(ConstraintError):
    """The range is satisfiable by no version."""


_NUM = re.compile(r"^\d+$")
_IDENT = re.compile(r"^[0-9A-Za-z-]+$")


def _ident_key(ident: str) -> tuple:
    # numeric identifiers sort before alphanumeric ones
    if _NUM.match(ident):
        return (0, int(ident), "")
    return (1, 0, ident)


@functools.total_ordering
@dataclass(frozen=True)
class Version:
    major: int
    minor: int
    patch: int
    prerelease: tuple[str, ...] = ()
    build: str = field(default="", compare=False)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.major, self.minor, self.patch)

    @property
    def is_prerelease(self) -> bool:
        return bool(self.prerelease)

    def _key(self) -> tuple:
        if self.prerelease:
            return (self.triple, 0, tuple(_ident_key(i) for i in self.prerelease))
        return (self.triple, 1, ())

    def __lt__(self, other: "Version") -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self) -> int:
        return hash((self.triple, self.prerelease))

    def release(self) -> "Version":
        return Version(self.major, self.minor, self.patch)

    def next_patch(self) -> "Version":
        return Version(self.major, self.minor, self.patch + 1)

    def next_minor(self) -> "Version":
        return Version(self.major, self.minor + 1, 0)

    def next_major(self) -> "Version":
        return Version(self.major + 1, 0, 0)

    def __str__(self) -> str:
        s = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            s += "-" + ".".join(self.prerelease)
        return s


ZERO = Version(0, 0, 0)
ONE = Version(1, 0, 0)


def _split_qualifiers(text: str) -> tuple[str, tuple[str, ...], str]:
    build = ""
    if "+" in text:
        text, build = text.split("+", 1)
        if not build or not all(_IDENT.match(p) for p in build.split(".")):
            raise MalformedVersion(f"bad build metadata in {text}+{build!r}")
    pre: tuple[str, ...] = ()
    if "-" in text:
        text, tag = text.split("-", 1)
        parts = tag.split(".")
        if not all(parts) or not all(_IDENT.match(p) for p in parts):
            raise MalformedVersion(f"bad prerelease tag {tag!r}")
        pre = tuple(parts)
    return text, pre, build


def parse_version(text: str) -> Version:
    """Parse a full ``major.minor.patch[-pre][+build]`` version (leading ``v`` allowed)."""
    s = text.strip()
    if s[:1] in ("v", "V"):
        s = s[1:]
    if not s:
        raise MalformedVersion(f"empty version {text!r}")
    core, pre, build = _split_qualifiers(s)
    parts = core.split(".")
    if len(parts) != 3 or not all(_NUM.match(p) for p in parts):
        raise MalformedVersion(f"not a full semantic version: {text!r}")
    return Version(int(parts[0]), int(parts[1]), int(parts[2]), pre, build)


@dataclass(frozen=True)
class Interval:
    """Version interval. ``lower=None`` is unbounded below, ``upper=None`` above."""

    lower: Optional[Version]
    lower_inclusive: bool
    upper: Optional[Version]
    upper_inclusive: bool

    def contains(self, v: Version) -> bool:
        if self.lower is not None:
            if v < self.lower or (v == self.lower and not self.lower_inclusive):
                return False
        if self.upper is not None:
            if v > self.upper or (v == self.upper and not self.upper_inclusive):
                return False
        return True

    def is_empty(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        if self.lower < self.upper:
            return False
        return not (self.lower == self.upper and self.lower_inclusive and self.upper_inclusive)

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_inc = self.lower, self.lower_inclusive
        if other.lower is not None and (
            lo is None or other.lower > lo or (other.lower == lo and not other.lower_inclusive)
        ):
            lo, lo_inc = other.lower, other.lower_inclusive
        hi, hi_inc = self.upper, self.upper_inclusive
        if other.upper is not None and (
            hi is None or other.upper < hi or (other.upper == hi and not other.upper_inclusive)
        ):
            hi, hi_inc = other.upper, other.upper_inclusive
        return Interval(lo, lo_inc, hi, hi_inc)

    def overlaps(self, other: "Interval") -> bool:
        return not self.intersect(other).is_empty()

    def touches(self, other: "Interval") -> bool:
        """Overlapping or adjacent with no gap (assumes self starts first)."""
        if self.overlaps(other):
            return True
        if self.upper is None or other.lower is None:
            return False
        return self.upper == other.lower and (self.upper_inclusive or other.lower_inclusive)

    def _sort_key(self) -> tuple:
        if self.lower is None:
            return (0, (), 0)
        return (1, self.lower._key(), 0 if self.lower_inclusive else 1)

    def first(self) -> Version:
        """Smallest version in the interval (for prerelease-band and release intervals)."""
        assert self.lower is not None
        if self.lower_inclusive:
            return self.lower
        if self.lower.prerelease:
            return Version(*self.lower.triple, self.lower.prerelease + ("0",))
        return self.lower.next_patch()


def _merge(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted((iv for iv in intervals if not iv.is_empty()), key=Interval._sort_key)
    out: list[Interval] = []
    for iv in items:
        if out and out[-1].touches(iv):
            prev = out[-1]
            hi, hi_inc = prev.upper, prev.upper_inclusive
            if hi is not None and (
                iv.upper is None or iv.upper > hi or (iv.upper == hi and iv.upper_inclusive)
            ):
                hi, hi_inc = iv.upper, iv.upper_inclusive
            out[-1] = Interval(prev.lower, prev.lower_inclusive, hi, hi_inc)
        else:
            out.append(iv)
    return tuple(out)


def _release_span(iv: Interval) -> Interval:
    """Tighten an order interval to release versions: ``[lo, hi)`` with release bounds."""
    if iv.lower is None:
        lo = ZERO
    elif iv.lower.prerelease:
        lo = iv.lower.release()
    elif iv.lower_inclusive:
        lo = iv.lower
    else:
        lo = iv.lower.next_patch()
    if iv.upper is None:
        hi = None
    elif iv.upper.prerelease:
        hi = iv.upper.release()
    elif iv.upper_inclusive:
        hi = iv.upper.next_patch()
    else:
        hi = iv.upper
    return Interval(lo, True, hi, False)


def _prerelease_band(triple: tuple[int, int, int]) -> Interval:
    # every prerelease of a triple lies in [T-0, T)
    return Interval(Version(*triple, ("0",)), True, Version(*triple), False)


@dataclass(frozen=True)
class ConstraintIntervalSet:
    intervals: tuple[Interval, ...]
    prerelease_intervals: tuple[Interval, ...] = ()
    source_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.intervals and not self.prerelease_intervals:
            raise EmptyRange(f"range admits no version: {self.source_text!r}")

    def contains(self, v: Version) -> bool:
        pool = self.prerelease_intervals if v.prerelease else self.intervals
        return any(iv.contains(v) for iv in pool)

    def intersects(self, other: Interval) -> bool:
        return any(iv.overlaps(other) for iv in self.intervals + self.prerelease_intervals)

    def min_version(self) -> Version:
        """Smallest admitted version; an exclusive lower bound yields its successor."""
        return min(iv.first() for iv in self.intervals + self.prerelease_intervals)

    def is_pinned(self) -> bool:
        ivs = self.intervals + self.prerelease_intervals
        if len(ivs) != 1:
            return False
        iv = ivs[0]
        if iv in self.intervals:
            return iv.upper is not None and iv.upper == iv.lower.next_patch()
        return iv.lower == iv.upper and iv.lower_inclusive and iv.upper_inclusive

    def as_bounds(self) -> list[tuple[Version, bool, Optional[Version], bool]]:
        """Release intervals as (lower, lower_inc, upper, upper_inc); points shown closed."""
        out = []
        for iv in self.intervals:
            if iv.upper is not None and iv.upper == iv.lower.next_patch():
                out.append((iv.lower, True, iv.lower, True))
            else:
                out.append((iv.lower, True, iv.upper, False))
        return out


def _render_interval(iv: Interval) -> str:
    if iv.lower is not None and iv.upper is not None and iv.lower == iv.upper:
        return f"={iv.lower}"
    parts = []
    if iv.lower is not None:
        parts.append((">=" if iv.lower_inclusive else ">") + str(iv.lower))
    if iv.upper is not None:
        parts.append(("<=" if iv.upper_inclusive else "<") + str(iv.upper))
    return " ".join(parts) or "*"


def render(c: ConstraintIntervalSet) -> str:
    """Canonical range text; ``parse_range(render(c)) == c``."""
    alts = []
    for iv in c.intervals:
        if iv.upper is not None and iv.upper == iv.lower.next_patch():
            alts.append(str(iv.lower))
        else:
            alts.append(_render_interval(iv))
    alts.extend(_render_interval(iv) for iv in c.prerelease_intervals)
    return " || ".join(alts)


# ---------------------------------------------------------------- range parsing

_UNSUPPORTED = re.compile(
    r"^(git\+|git:|github:|gitlab:|bitbucket:|gist:|https?:|file:|link:|npm:|workspace:|portal:)"
    r"|^[\w.-]+/[\w.-]+(#.*)?$"
    r"|\.(tgz|tar\.gz|tar)$"
)
_DIST_TAG = re.compile(r"^[A-Za-z][\w.-]*$")
_XR = r"(?:[xX*]|\d+)"
_PARTIAL = re.compile(
    rf"^v?(?P<M>{_XR})(?:\.(?P<m>{_XR})(?:\.(?P<p>{_XR})"
    r"(?:-(?P<pre>[0-9A-Za-z.-]+))?(?:\+(?P<build>[0-9A-Za-z.-]+))?)?)?$"
)
_OP_SPACE = re.compile(r"(<=|>=|<|>|=|~>|~|\^)\s+")
_HYPHEN = re.compile(r"^(?P<a>\S+)\s+-\s+(?P<b>\S+)$")

_INF = None


@dataclass(frozen=True)
class _Partial:
    major: Optional[int]
    minor: Optional[int]
    patch: Optional[int]
    pre: tuple[str, ...] = ()

    @property
    def is_full(self) -> bool:
        return self.patch is not None

    def floor(self) -> Version:
        return Version(self.major or 0, self.minor or 0, self.patch or 0, self.pre)


def _parse_partial(text: str, whole: str) -> _Partial:
    m = _PARTIAL.match(text)
    if not m:
        raise MalformedRange(f"bad version in range {whole!r}: {text!r}")

    def num(g: Optional[str]) -> Optional[int]:
        return None if g is None or g in "xX*" else int(g)

    major, minor, patch = num(m["M"]), num(m["m"]), num(m["p"])
    # anything after a wildcard is a wildcard too
    if major is None:
        minor = patch = None
    elif minor is None:
        patch = None
    pre: tuple[str, ...] = ()
    if m["pre"] is not None:
        parts = m["pre"].split(".")
        if not all(parts):
            raise MalformedRange(f"empty prerelease identifier in {whole!r}")
        if patch is not None:
            pre = tuple(parts)
    return _Partial(major, minor, patch, pre)


def _ge(v: Version) -> Interval:
    return Interval(v, True, _INF, False)


def _lt(v: Version) -> Interval:
    return Interval(None, False, v, False)


_ANY = Interval(None, False, None, False)
_NONE = Interval(ZERO, False, ZERO, False)


def _xrange(p: _Partial) -> Interval:
    if p.major is None:
        return _ANY
    if p.minor is None:
        return Interval(Version(p.major, 0, 0), True, Version(p.major + 1, 0, 0), False)
    if p.patch is None:
        return Interval(Version(p.major, p.minor, 0), True, Version(p.major, p.minor + 1, 0), False)
    v = p.floor()
    return Interval(v, True, v, True)


def _tilde(p: _Partial) -> Interval:
    if p.major is None:
        return _ANY
    lo = p.floor()
    if p.minor is None:
        return Interval(lo, True, Version(p.major + 1, 0, 0), False)
    return Interval(lo, True, Version(p.major, p.minor + 1, 0), False)


def _caret(p: _Partial) -> Interval:
    if p.major is None:
        return _ANY
    lo = p.floor()
    if p.major > 0 or p.minor is None:
        hi = Version(p.major + 1, 0, 0)
    elif p.minor > 0 or p.patch is None:
        hi = Version(0, p.minor + 1, 0)
    else:
        hi = Version(0, 0, p.patch + 1)
    return Interval(lo, True, hi, False)


def _primitive(op: str, p: _Partial) -> Interval:
    if op == "=":
        return _xrange(p)
    if p.major is None:
        return _ANY if op in (">=", "<=") else _NONE
    if op == ">=":
        return _ge(p.floor())
    if op == "<":
        return _lt(p.floor())
    if op == ">":
        if p.is_full:
            return Interval(p.floor(), False, _INF, False)
        return _ge(_xrange(p).upper)
    if op == "<=":
        if p.is_full:
            return Interval(None, False, p.floor(), True)
        return _lt(_xrange(p).upper)
    raise MalformedRange(f"unknown operator {op!r}")


_COMPARATOR = re.compile(r"^(?P<op><=|>=|<|>|=|~>|~|\^)?(?P<ver>.*)$")


def _comparator_set(text: str, whole: str) -> tuple[Interval, list[Version]]:
    """One space-separated intersection; returns the order interval and prerelease-tagged bounds."""
    text = text.strip()
    if text in ("", "*", "x", "X", "latest"):
        return _ANY, []
    tagged: list[Version] = []
    m = _HYPHEN.match(text)
    if m:
        a = _parse_partial(m["a"], whole)
        b = _parse_partial(m["b"], whole)
        lo = _ANY if a.major is None else _ge(a.floor())
        hi = _primitive("<=", b)
        tagged = [p.floor() for p in (a, b) if p.pre]
        return lo.intersect(hi), tagged
    result = _ANY
    for token in _OP_SPACE.sub(r"\1", text).split():
        cm = _COMPARATOR.match(token)
        op, ver = cm["op"] or "", cm["ver"]
        if not ver:
            raise MalformedRange(f"operator without version in {whole!r}")
        p = _parse_partial(ver, whole)
        if op in ("~", "~>"):
            iv = _tilde(p)
        elif op == "^":
            iv = _caret(p)
        elif op == "":
            iv = _xrange(p)
        else:
            iv = _primitive(op, p)
        if p.pre:
            tagged.append(p.floor())
        result = result.intersect(iv)
    return result, tagged


@functools.lru_cache(maxsize=200_000)
def parse_range(text: str) -> ConstraintIntervalSet:
    """Parse an npm range expression into a normalized interval set."""
    s = text.strip()
    if _UNSUPPORTED.search(s):
        raise UnsupportedConstraint(f"non-registry constraint: {text!r}")
    if s != "latest" and _DIST_TAG.match(s) and not _PARTIAL.match(s):
        raise UnsupportedConstraint(f"dist-tag not supported: {text!r}")
    releases: list[Interval] = []
    pres: list[Interval] = []
    for alt in s.split("||"):
        iv, tagged = _comparator_set(alt, text)
        if iv.is_empty():
            continue
        span = _release_span(iv)
        if not span.is_empty():
            releases.append(span)
        for triple in sorted({t.triple for t in tagged}):
            band = iv.intersect(_prerelease_band(triple))
            if not band.is_empty():
                pres.append(band)
    return ConstraintIntervalSet(_merge(releases), _merge(pres), source_text=text)


# ---------------------------------------------------------------- classification


class UpdateStrategy(str, enum.Enum):
    BALANCED = "balanced"
    RESTRICTIVE = "restrictive"
    PERMISSIVE = "permissive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AdmissionProfile:
    pinned: bool
    admits_patch: bool
    admits_minor: bool
    admits_major: bool

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (self.pinned, self.admits_patch, self.admits_minor, self.admits_major)


def admission_profile(c: ConstraintIntervalSet) -> AdmissionProfile:
    """Which update bands above the minimum admitted version the range reaches into."""
    m = c.min_version()
    patch_band = Interval(m.next_patch(), True, m.next_minor(), False)
    minor_band = Interval(m.next_minor(), True, m.next_major(), False)
    major_band = Interval(m.next_major(), True, None, False)
    return AdmissionProfile(
        c.is_pinned(),
        c.intersects(patch_band),
        c.intersects(minor_band),
        c.intersects(major_band),
    )


def classify(c: ConstraintIntervalSet) -> UpdateStrategy:
    m = c.min_version()
    prof = admission_profile(c)
    if m >= ONE:
        if prof.admits_major:
            return UpdateStrategy.PERMISSIVE
        if prof.admits_minor:
            return UpdateStrategy.BALANCED
        return UpdateStrategy.RESTRICTIVE
    if prof.pinned:
        return UpdateStrategy.BALANCED
    return UpdateStrategy.PERMISSIVE


@functools.lru_cache(maxsize=200_000)
def classify_text(text: str) -> UpdateStrategy:
    """Parse and classify; raises ConstraintError for anything unclassifiable."""
    return classify(parse_range(text))


def spans_release_boundary(c: ConstraintIntervalSet) -> bool:
    """True when the range admits versions on both sides of 1.0.0 (flagged in audits)."""
    return c.min_version() < ONE and c.intersects(Interval(ONE, True, None, False))
