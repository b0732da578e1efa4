"""Region reliability score (0-3) for pooled reproduction-number estimates.

Two signals are banded low/mid/high and looked up in a 3x3 table:

* a case-volume proxy, the mean daily death count over the last ten days;
* spatial heterogeneity, the coefficient of variation of sub-area case counts.

Score meaning: 0 = highly unlikely the region is homogeneous (possible
clustered outbreak) ... 3 = highly likely homogeneous, estimate is a good
summary of the region.

The thresholds and table are configurable stand-ins; the defaults are not
calibrated against any published tool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import TooFewSubareas, TooShort

WINDOW_DAYS = 10

# rows: death band low/mid/high; columns: heterogeneity band low/mid/high
DEFAULT_SCORE_TABLE = (
    (1, 1, 0),
    (2, 2, 1),
    (3, 2, 1),
)


@dataclass(frozen=True)
class RegionSignal:
    region_id: str
    daily_deaths: tuple[float, ...]
    subarea_cases: tuple[float, ...]

    def __post_init__(self):
        if len(self.daily_deaths) < WINDOW_DAYS:
            raise TooShort(
                f"region {self.region_id!r}: need {WINDOW_DAYS} days of deaths, "
                f"got {len(self.daily_deaths)}"
            )
        if len(self.subarea_cases) < 2:
            raise TooFewSubareas(f"region {self.region_id!r}: need at least 2 sub-areas")
        for name, vals in (("daily_deaths", self.daily_deaths), ("subarea_cases", self.subarea_cases)):
            if any(not math.isfinite(x) or x < 0 for x in vals):
                raise ValueError(f"region {self.region_id!r}: {name} must be finite and >= 0")


@dataclass(frozen=True)
class ReliabilityConfig:
    death_thresholds: tuple[float, float] = (2.0, 10.0)
    heterogeneity_thresholds: tuple[float, float] = (0.5, 1.0)
    score_table: tuple[tuple[int, ...], ...] = field(default=DEFAULT_SCORE_TABLE)

    def __post_init__(self):
        for name in ("death_thresholds", "heterogeneity_thresholds"):
            lo, hi = getattr(self, name)
            if not 0 <= lo < hi:
                raise ValueError(f"{name} must be non-negative and strictly increasing")
        tab = self.score_table
        if len(tab) != 3 or any(len(row) != 3 for row in tab):
            raise ValueError("score_table must be 3x3")
        if any(x not in (0, 1, 2, 3) for row in tab for x in row):
            raise ValueError("score_table entries must be in {0, 1, 2, 3}")


def death_proxy(daily_deaths: Sequence[float]) -> float:
    """Mean of the most recent ten daily death counts."""
    if len(daily_deaths) < WINDOW_DAYS:
        raise TooShort(f"need at least {WINDOW_DAYS} days, got {len(daily_deaths)}")
    return float(np.mean(np.asarray(daily_deaths, dtype=float)[-WINDOW_DAYS:]))


def heterogeneity(subarea_cases: Sequence[float]) -> float:
    """Coefficient of variation (population sd / mean) of sub-area case counts.

    All-zero input returns ``inf`` so it always lands in the worst band.
    """
    x = np.asarray(subarea_cases, dtype=float)
    if x.size < 2:
        raise TooFewSubareas(f"need at least 2 sub-areas, got {x.size}")
    mean = x.mean()
    if mean == 0:
        return math.inf
    return float(x.std() / mean)


def _band(value, thresholds):
    lo, hi = thresholds
    if value < lo:
        return 0
    return 1 if value < hi else 2


def reliability_score(signal: RegionSignal, cfg: ReliabilityConfig | None = None) -> int:
    cfg = cfg or ReliabilityConfig()
    d = _band(death_proxy(signal.daily_deaths), cfg.death_thresholds)
    h = _band(heterogeneity(signal.subarea_cases), cfg.heterogeneity_thresholds)
    return int(cfg.score_table[d][h])
