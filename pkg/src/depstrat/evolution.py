"""Monthly dependents-per-strategy series for one target package and strategy-shift detection."""

from __future__ import annotations

import bisect
import calendar
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Optional, Sequence

import numpy as np

from .ingest import RUNTIME, EcosystemSnapshot, UnknownPackage
from .semver import ONE, ConstraintError, UpdateStrategy, classify_text

STRATEGY_COLUMNS = (UpdateStrategy.BALANCED, UpdateStrategy.RESTRICTIVE, UpdateStrategy.PERMISSIVE)


def parse_month(text: str) -> tuple[int, int]:
    y, m = text.split("-")[:2]
    month = (int(y), int(m))
    if not 1 <= month[1] <= 12:
        raise ValueError(f"bad month {text!r}")
    return month


def month_str(ym: tuple[int, int]) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


def month_range(start: str, end: str) -> list[str]:
    (y, m), stop = parse_month(start), parse_month(end)
    out = []
    while (y, m) <= stop:
        out.append(month_str((y, m)))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return out


def month_end(month: str) -> date:
    y, m = parse_month(month)
    return date(y, m, calendar.monthrange(y, m)[1])


def month_index(month: str) -> int:
    y, m = parse_month(month)
    return y * 12 + m - 1


@dataclass(frozen=True)
class EvolutionSeries:
    target: str
    months: tuple[tuple[str, dict[UpdateStrategy, int]], ...]
    first_post_1_0_0: Optional[str]

    def rows(self) -> list[dict]:
        return [
            {"month": m, "balanced": c[UpdateStrategy.BALANCED],
             "restrictive": c[UpdateStrategy.RESTRICTIVE], "permissive": c[UpdateStrategy.PERMISSIVE],
             "marker_1_0_0": int(m == self.first_post_1_0_0)}
            for m, c in self.months
        ]


@dataclass(frozen=True)
class ShiftEvent:
    month: str
    from_strategy: UpdateStrategy
    to_strategy: UpdateStrategy
    persisted_months: int
    at_1_0_0: bool = False

    def to_json(self) -> dict:
        return {"month": self.month, "from": self.from_strategy.value, "to": self.to_strategy.value,
                "persisted_months": self.persisted_months, "at_1_0_0": self.at_1_0_0}


def evolution_series(s: EcosystemSnapshot, target: str, start: str, end: str) -> EvolutionSeries:
    """Per month, classify the target constraint of each dependent's latest release so far.

    Latest release = highest publish date on or before the month's last day,
    ties broken by version precedence. Each dependent counts once per month.
    """
    if target not in s.packages:
        raise UnknownPackage(target)
    declared: dict[str, dict] = {}
    for e in s.edges:
        if e.target == target and e.kind == RUNTIME:
            declared.setdefault(e.dependent, {})[e.dependent_version] = e.constraint_text

    histories = []
    for dep in sorted(declared):
        pkg = s.packages.get(dep)
        if pkg is None:
            continue
        hist = sorted(pkg.versions, key=lambda vd: (vd[1], vd[0]._key()))
        dates = [d for _, d in hist]
        strategies = []
        for v, _ in hist:
            text = declared[dep].get(v)
            try:
                strategies.append(None if text is None else classify_text(text))
            except ConstraintError:
                strategies.append(None)
        histories.append((dates, strategies))

    months = []
    for month in month_range(start, end):
        cutoff = month_end(month)
        counts = {st: 0 for st in STRATEGY_COLUMNS}
        for dates, strategies in histories:
            i = bisect.bisect_right(dates, cutoff) - 1
            if i >= 0 and strategies[i] is not None:
                counts[strategies[i]] += 1
        months.append((month, counts))

    post = sorted((d, v._key()) for v, d in s.packages[target].versions if v >= ONE)
    first = month_str((post[0][0].year, post[0][0].month)) if post else None
    return EvolutionSeries(target, tuple(months), first)


def dominant(counts: dict[UpdateStrategy, int]) -> Optional[UpdateStrategy]:
    top = max(counts.values())
    leaders = [st for st in STRATEGY_COLUMNS if counts[st] == top]
    return leaders[0] if top > 0 and len(leaders) == 1 else None


def detect_shifts(series: EvolutionSeries, persistence: int = 3, window: int = 2) -> list[ShiftEvent]:
    """Changes of the dominant strategy that hold for at least ``persistence`` months.

    Months without a unique leader break runs but never start one. Events within
    ``window`` months of the first 1.0.0+ release are flagged ``at_1_0_0``.
    """
    runs: list[list] = []  # [strategy, start_month, length]
    for month, counts in series.months:
        d = dominant(counts)
        if runs and runs[-1][0] == d:
            runs[-1][2] += 1
        else:
            runs.append([d, month, 1])
    stable = [r for r in runs if r[0] is not None and r[2] >= persistence]
    events = []
    for prev, cur in zip(stable, stable[1:]):
        if prev[0] == cur[0]:
            continue
        near = (series.first_post_1_0_0 is not None
                and abs(month_index(cur[1]) - month_index(series.first_post_1_0_0)) <= window)
        events.append(ShiftEvent(cur[1], prev[0], cur[0], cur[2], near))
    return events


def sample_packages(rows: Sequence[Mapping], per_class: int = 40, min_dependents: int = 0,
                    max_dependents: Optional[int] = None, seed: int = 0) -> list[Mapping]:
    """Up to ``per_class`` packages per label with dependents in [min, max], seeded.

    ``rows`` need ``package``, ``label`` and ``n_dependents``; output is sorted by
    label then package so it does not depend on input order.
    """
    by_label: dict[str, list[Mapping]] = {}
    for r in sorted(rows, key=lambda r: r["package"]):
        n = int(r["n_dependents"])
        if n >= min_dependents and (max_dependents is None or n <= max_dependents):
            by_label.setdefault(r["label"], []).append(r)
    out = []
    for lab in sorted(by_label):
        pool = by_label[lab]
        rng = np.random.default_rng(np.random.SeedSequence([seed, *lab.encode()]))
        pick = rng.choice(len(pool), min(per_class, len(pool)), replace=False)
        out.extend(sorted((pool[i] for i in pick), key=lambda r: r["package"]))
    return out
