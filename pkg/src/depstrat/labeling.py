"""Package specialization: the majority update strategy among a package's dependents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .ingest import EcosystemSnapshot, InputError, UnknownPackage
from .semver import ConstraintError, UpdateStrategy, classify_text

UNSPECIALIZED = "unspecialized"
STRATEGIES = (UpdateStrategy.BALANCED, UpdateStrategy.RESTRICTIVE, UpdateStrategy.PERMISSIVE)
LABELS = ("balanced", "restrictive", "permissive", UNSPECIALIZED)
DEFAULT_SWEEP = (0.5, 0.75, 0.90, 0.95)


class InsufficientDependents(InputError):
    pass


@dataclass(frozen=True)
class StrategyDistribution:
    counts: Mapping[UpdateStrategy, int]
    excluded: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_constraints(cls, constraints: Iterable[str]) -> "StrategyDistribution":
        counts = {s: 0 for s in STRATEGIES}
        excluded = 0
        for text in constraints:
            try:
                counts[classify_text(text)] += 1
            except ConstraintError:
                excluded += 1
        return cls(counts, excluded)


@dataclass(frozen=True)
class SpecializationLabel:
    value: str
    agreement: float
    distribution: Optional[StrategyDistribution] = field(default=None, compare=False)


def strategy_distribution(s: EcosystemSnapshot, p: str) -> StrategyDistribution:
    """Classify the constraint of every latest runtime edge into ``p``."""
    return StrategyDistribution.from_constraints(e.constraint_text for e in s.runtime_dependents(p))


def label(dist: StrategyDistribution, threshold: float = 0.5) -> SpecializationLabel:
    """Majority strategy if its share is strictly above ``threshold``, else unspecialized."""
    total = dist.total
    if total < 2:
        raise InsufficientDependents(f"need at least 2 classifiable dependents, got {total}")
    best = max(STRATEGIES, key=lambda s: dist.counts[s])
    share = dist.counts[best] / total
    value = best.value if share > threshold else UNSPECIALIZED
    return SpecializationLabel(value, share, dist)


def label_all(s: EcosystemSnapshot, threshold: float = 0.5) -> dict[str, SpecializationLabel]:
    out = {}
    for name in s.labeled_population():
        dist = strategy_distribution(s, name)
        if dist.total < 2:
            continue
        out[name] = label(dist, threshold)
    return out


def relabel(labels: Mapping[str, SpecializationLabel], threshold: float) -> dict[str, SpecializationLabel]:
    return {n: label(lab.distribution, threshold) for n, lab in labels.items()}


def class_shares(labels: Mapping[str, SpecializationLabel]) -> dict[str, float]:
    n = len(labels)
    return {c: (sum(1 for lab in labels.values() if lab.value == c) / n if n else 0.0) for c in LABELS}


def threshold_sweep(
    labels: Mapping[str, SpecializationLabel], thresholds: Sequence[float] = DEFAULT_SWEEP
) -> list[dict]:
    """Class distribution per specialization threshold, reusing the per-package tallies."""
    rows = []
    for t in thresholds:
        relabeled = relabel(labels, t)
        row = {"threshold": t, "n_packages": len(relabeled)}
        row.update(class_shares(relabeled))
        rows.append(row)
    return rows


def labels_to_rows(labels: Mapping[str, SpecializationLabel]) -> list[dict]:
    return [
        {
            "package": n,
            "label": lab.value,
            "agreement": lab.agreement,
            "n_dependents": lab.distribution.total if lab.distribution else "",
            "n_excluded": lab.distribution.excluded if lab.distribution else "",
        }
        for n, lab in sorted(labels.items())
    ]


__all__ = [
    "InsufficientDependents", "LABELS", "SpecializationLabel", "StrategyDistribution",
    "UNSPECIALIZED", "UnknownPackage", "class_shares", "label", "label_all", "relabel",
    "strategy_distribution", "threshold_sweep", "labels_to_rows",
]
