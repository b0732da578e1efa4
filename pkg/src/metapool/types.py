"""Core records: outcome measures, per-model quantile sets, fitted summaries."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exceptions import (
    DuplicateKey,
    EmptyGroup,
    NegativeForCountMeasure,
    NonFinite,
    NonMonotone,
    ValidationError,
)

#: Percentile levels carried by every :class:`QuantileSet`, in order.
LEVELS = (5, 25, 50, 75, 95)


class OutcomeMeasure(enum.Enum):
    """Epidemic outcome measure; the value is the short tag used in files."""

    ReproductionNumber = "R"
    GrowthRate = "r"
    DailyInfections = "I"

    @property
    def nonnegative(self) -> bool:
        return self is OutcomeMeasure.DailyInfections

    @property
    def tag(self) -> str:
        return self.value

    @property
    def slug(self) -> str:
        # file-name safe on case-insensitive file systems (R vs r)
        return {
            OutcomeMeasure.ReproductionNumber: "reproduction_number",
            OutcomeMeasure.GrowthRate: "growth_rate",
            OutcomeMeasure.DailyInfections: "daily_infections",
        }[self]

    @classmethod
    def from_tag(cls, tag: str) -> "OutcomeMeasure":
        for m in cls:
            if m.value == tag:
                return m
        raise ValidationError(f"unknown measure tag {tag!r}; expected one of R, r, I")


class FitPath(enum.Enum):
    Normal = "normal"
    Gamma = "gamma"


@dataclass(frozen=True)
class QuantileSet:
    """Five percentiles (5, 25, 50, 75, 95) reported by one model."""

    model_id: str
    region_id: str
    measure: OutcomeMeasure
    q: tuple[float, float, float, float, float]

    @property
    def q5(self) -> float:
        return self.q[0]

    @property
    def q25(self) -> float:
        return self.q[1]

    @property
    def q50(self) -> float:
        return self.q[2]

    @property
    def q75(self) -> float:
        return self.q[3]

    @property
    def q95(self) -> float:
        return self.q[4]

    @property
    def key(self) -> tuple[OutcomeMeasure, str, str]:
        return (self.measure, self.region_id, self.model_id)

    @property
    def degenerate(self) -> bool:
        """True when all five percentiles coincide (a point mass)."""
        return self.q[0] == self.q[4]


@dataclass(frozen=True)
class FittedSummary:
    """Per-model (mean, standard error) approximation plus fit diagnostics."""

    model_id: str
    region_id: str
    measure: OutcomeMeasure
    y_hat: float
    se_hat: float
    sk: float
    se_star: float
    path: FitPath
    degenerate: bool = False


def validate_quantiles(
    raw: Sequence[float],
    measure: OutcomeMeasure,
    model_id: str = "",
    region_id: str = "",
) -> QuantileSet:
    """Check five raw percentiles and wrap them in a :class:`QuantileSet`.

    Raises
    ------
    NonFinite
        Wrong count, or a value is NaN/inf/not numeric.
    NonMonotone
        The percentiles are not non-decreasing.
    NegativeForCountMeasure
        ``measure`` is non-negative and Q(5) < 0.
    """
    try:
        q = tuple(float(x) for x in raw)
    except (TypeError, ValueError) as exc:
        raise NonFinite(f"quantiles must be numeric: {raw!r}") from exc
    if len(q) != 5:
        raise NonFinite(f"expected 5 quantiles, got {len(q)}")
    if not all(math.isfinite(x) for x in q):
        raise NonFinite(f"non-finite quantile in {q}")
    for (lo_lvl, lo), (hi_lvl, hi) in zip(zip(LEVELS, q), zip(LEVELS[1:], q[1:])):
        if lo > hi:
            raise NonMonotone(f"Q({lo_lvl})={lo} > Q({hi_lvl})={hi}")
    if measure.nonnegative and q[0] < 0:
        raise NegativeForCountMeasure(f"Q(5)={q[0]} < 0 for count measure {measure.tag}")
    return QuantileSet(model_id=model_id, region_id=region_id, measure=measure, q=q)


@dataclass(frozen=True)
class Dataset:
    """Quantile records keyed by (measure, region_id, model_id)."""

    records: tuple[QuantileSet, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.key in seen:
                m, reg, mod = rec.key
                raise DuplicateKey(f"duplicate record for ({m.tag}, {reg}, {mod})")
            seen.add(rec.key)

    @classmethod
    def from_records(cls, records: Iterable[QuantileSet]) -> "Dataset":
        return cls(tuple(records))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def groups(self) -> list[tuple[OutcomeMeasure, str]]:
        """Distinct (measure, region) pairs in first-seen order."""
        out = {}
        for rec in self.records:
            out.setdefault((rec.measure, rec.region_id), None)
        return list(out)


def group_for_pooling(ds: Dataset, measure: OutcomeMeasure, region: str) -> list[QuantileSet]:
    """All records for one (measure, region), in dataset order."""
    out = [r for r in ds.records if r.measure is measure and r.region_id == region]
    if not out:
        raise EmptyGroup(f"no records for ({measure.tag}, {region})")
    return out
