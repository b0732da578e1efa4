"""Random-effects pooling: REML heterogeneity, Wald / Knapp-Hartung intervals.

The between-model variance is always estimated by inverse-variance REML.
User weights (equal by default) only change the pooled point estimate and
its variance, which for arbitrary weights ``a`` is

    Var(theta) = sum(a**2 * (v + tau2)) / sum(a)**2

Prediction intervals add ``tau2`` to that variance and treat it as known.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import TooFewModels
from .optim import normal_quantile, t_quantile
from .types import FittedSummary, OutcomeMeasure

logger = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5) - 1) / 2
_GRID_POINTS = 400


class Weighting(enum.Enum):
    Equal = "equal"
    InverseVariance = "inverse-variance"


class IntervalMethod(enum.Enum):
    Wald = "wald"
    KNHA = "knha"


@dataclass(frozen=True)
class PoolResult:
    theta_hat: float
    se_theta: float
    tau2: float
    se_tau2: float
    ci_low: float
    ci_high: float
    cr_low: float
    cr_high: float
    k: int
    method: IntervalMethod
    weighting: Weighting
    clamped_low: bool = False
    alpha: float = 0.10
    measure: OutcomeMeasure | None = None
    region_id: str | None = None
    model_ids: tuple[str, ...] = ()
    reliability: int | None = None


def _as_arrays(y, v):
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if y.ndim != 1 or y.shape != v.shape:
        raise ValueError("y and v must be 1-D arrays of equal length")
    if y.size < 2:
        raise TooFewModels(f"need at least 2 estimates to pool, got {y.size}")
    return y, v


def restricted_loglik(tau2: float, y, v) -> float:
    """REML log-likelihood of the random-effects model, up to a constant."""
    w = 1.0 / (v + tau2)
    sw = w.sum()
    theta = (w * y).sum() / sw
    return -0.5 * (np.log(v + tau2).sum() + math.log(sw) + (w * (y - theta) ** 2).sum())


def _loglik_grid(grid, y, v):
    # restricted_loglik evaluated along a whole grid at once
    vt = v[None, :] + grid[:, None]
    w = 1.0 / vt
    sw = w.sum(axis=1)
    theta = (w * y).sum(axis=1) / sw
    return -0.5 * (np.log(vt).sum(axis=1) + np.log(sw) + (w * (y - theta[:, None]) ** 2).sum(axis=1))


def reml_score(tau2: float, y, v) -> float:
    """Derivative of :func:`restricted_loglik` with respect to ``tau2``."""
    w = 1.0 / (v + tau2)
    sw = w.sum()
    theta = (w * y).sum() / sw
    return 0.5 * ((w**2 * (y - theta) ** 2).sum() - sw + (w**2).sum() / sw)


def reml_tau2(y: Sequence[float], v: Sequence[float]) -> tuple[float, float]:
    """REML estimate of the between-model variance and its standard error.

    The restricted likelihood is scanned on ``0`` plus a log-spaced grid up to
    ``B = 10 * max(var(y), max(v))``; the best grid cell is refined by
    golden-section search, then polished by solving the score equation
    (the likelihood is too flat near its peak for comparisons alone to
    resolve it below ~1e-8). The standard error comes from the expected Fisher
    information at the estimate.

    Returns
    -------
    tau2 : float
    se_tau2 : float
    """
    y, v = _as_arrays(y, v)
    if np.any(~(v > 0)):
        raise ValueError("within-model variances must be positive")

    if np.all(y == y[0]):
        tau2 = 0.0
    else:
        bound = 10.0 * max(float(np.var(y, ddof=1)), float(v.max()))
        grid = np.concatenate(([0.0], np.geomspace(bound * 1e-12, bound, _GRID_POINTS)))
        i = int(np.argmax(_loglik_grid(grid, y, v)))
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, grid.size - 1)]
        tau2 = _golden_max(lambda t: restricted_loglik(t, y, v), a, b, tol=1e-12)
        if tau2 > 0:
            lo, hi = a, b
            if reml_score(lo, y, v) > 0 > reml_score(hi, y, v):
                tau2 = brentq(reml_score, lo, hi, args=(y, v), xtol=1e-15, rtol=1e-15)
        if restricted_loglik(tau2, y, v) < restricted_loglik(grid[i], y, v):
            tau2 = float(grid[i])
        # a peak this flat at the boundary is zero up to rounding
        ll_hat = restricted_loglik(tau2, y, v)
        if restricted_loglik(0.0, y, v) >= ll_hat - 1e-13 * max(1.0, abs(ll_hat)):
            tau2 = 0.0

    w = 1.0 / (v + tau2)
    sw, sw2, sw3 = w.sum(), (w**2).sum(), (w**3).sum()
    info = 0.5 * (sw2 - 2.0 * sw3 / sw + (sw2 / sw) ** 2)
    return float(tau2), float(math.sqrt(1.0 / info))


def _golden_max(f, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    # the absolute tolerance can sit below float spacing for large brackets
    for _ in range(500):
        if b - a <= max(tol, 4e-16 * (abs(a) + abs(b))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    # the bracket may touch zero where the maximum often sits
    best = max((a, b, 0.5 * (a + b)), key=f)
    return float(best)


def pool(
    y: Sequence[float],
    v: Sequence[float],
    weighting: Weighting = Weighting.Equal,
    method: IntervalMethod = IntervalMethod.Wald,
    alpha: float = 0.10,
    tau2: float | None = None,
    se_tau2: float | None = None,
    nonnegative_measure: bool = False,
    knha_truncate: bool = False,
) -> PoolResult:
    """Pool estimates ``y`` with within-model variances ``v``.

    If ``tau2`` is not given it is estimated with :func:`reml_tau2`.
    With ``nonnegative_measure`` any negative lower endpoint is raised to 0
    and ``clamped_low`` is set.
    """
    y, v = _as_arrays(y, v)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if tau2 is None:
        tau2, se_tau2 = reml_tau2(y, v)
    elif se_tau2 is None:
        se_tau2 = float("nan")
    k = y.size

    iv = 1.0 / (v + tau2)
    a = np.full(k, 1.0 / k) if weighting is Weighting.Equal else iv
    theta = float((a * y).sum() / a.sum())
    var = float((a**2 * (v + tau2)).sum() / a.sum() ** 2)

    if method is IntervalMethod.Wald:
        crit = normal_quantile(1 - alpha / 2)
    else:
        q_w = float((iv * (y - theta) ** 2).sum())
        s2 = q_w / (k - 1)
        if knha_truncate:
            s2 = max(1.0, s2)
        var *= s2
        crit = t_quantile(1 - alpha / 2, k - 1)

    se = math.sqrt(var)
    half_ci = crit * se
    half_cr = crit * math.sqrt(var + tau2)
    ci_low, ci_high = theta - half_ci, theta + half_ci
    cr_low, cr_high = theta - half_cr, theta + half_cr

    clamped = False
    if nonnegative_measure:
        if ci_low < 0:
            ci_low, clamped = 0.0, True
        if cr_low < 0:
            cr_low, clamped = 0.0, True

    return PoolResult(
        theta_hat=theta,
        se_theta=se,
        tau2=float(tau2),
        se_tau2=float(se_tau2),
        ci_low=ci_low,
        ci_high=ci_high,
        cr_low=cr_low,
        cr_high=cr_high,
        k=k,
        method=method,
        weighting=weighting,
        clamped_low=clamped,
        alpha=alpha,
    )


def variance_floor(y: float) -> float:
    """Replacement variance for a point-mass estimate."""
    return (1e-6 * max(abs(y), 1.0)) ** 2


def combine_region(
    summaries: Sequence[FittedSummary],
    weighting: Weighting = Weighting.Equal,
    method: IntervalMethod = IntervalMethod.Wald,
    alpha: float = 0.10,
    knha_truncate: bool = False,
) -> PoolResult:
    """Pool the fitted summaries of one (measure, region) group."""
    if len(summaries) < 2:
        raise TooFewModels(f"need at least 2 models to pool, got {len(summaries)}")
    measures = {s.measure for s in summaries}
    regions = {s.region_id for s in summaries}
    if len(measures) != 1 or len(regions) != 1:
        raise ValueError("summaries must share one measure and one region")

    y = np.array([s.y_hat for s in summaries], dtype=float)
    v = np.array([s.se_hat**2 for s in summaries], dtype=float)
    for i, s in enumerate(summaries):
        if not v[i] > 0:
            v[i] = variance_floor(s.y_hat)
            logger.warning(
                "zero standard error for model %s in region %s; variance floored at %.3g",
                s.model_id, s.region_id, v[i],
            )

    measure = measures.pop()
    tau2, se_tau2 = reml_tau2(y, v)
    res = pool(
        y, v, weighting, method, alpha, tau2, se_tau2,
        nonnegative_measure=measure.nonnegative, knha_truncate=knha_truncate,
    )
    return replace(
        res,
        measure=measure,
        region_id=regions.pop(),
        model_ids=tuple(s.model_id for s in summaries),
    )
