"""Turn reported percentiles into a (mean, standard error) pair per model.

Models whose quartiles are roughly symmetric get a normal approximation:
the median and a conservative standard error taken from the wider of the two
one-sided 90% gaps.  Noticeably skewed models get a gamma distribution fitted
to their percentiles with a particle swarm, and the fitted mean/sd are used
instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .exceptions import GammaFitFailure, ZeroIQR
from .optim import GammaFitConfig, normal_quantile, pso_minimize
from .types import LEVELS, FitPath, FittedSummary, QuantileSet

# search box, log10 units; rate is in units of 1 / (5-95 spread)
_LOG_SHAPE_BOX = (-3.0, 6.0)
_LOG_RATE_BOX = (-6.0, 9.0)


@dataclass(frozen=True)
class PrepConfig:
    alpha: float = 0.10
    skew_threshold: float = 0.5
    gamma_fit: GammaFitConfig = field(default_factory=GammaFitConfig)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.skew_threshold > 0:
            raise ValueError("skew_threshold must be positive")


@dataclass(frozen=True)
class GammaFitResult:
    """A (possibly reflected and shifted) gamma fitted to percentiles.

    The fitted variable is ``offset + G`` (or ``offset - G`` when
    ``reflected``) with ``G ~ Gamma(shape, rate)``. ``objective_value`` is the
    sum of squared quantile errors measured in units of the 5-95 spread.
    """

    shape: float
    rate: float
    offset: float
    reflected: bool
    mean: float
    sd: float
    objective_value: float


def conservative_se(q: QuantileSet, alpha: float = 0.10) -> float:
    """Wider one-sided gap between the median and Q(5)/Q(95), divided by z(1 - alpha/2)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    gap = max(abs(q.q95 - q.q50), abs(q.q50 - q.q5))
    return gap / normal_quantile(1 - alpha / 2)


def bowley_skewness(q: QuantileSet) -> float:
    """Quartile skewness (Q75 + Q25 - 2 Q50) / (Q75 - Q25), in [-1, 1]."""
    iqr = q.q75 - q.q25
    if iqr <= 0:
        raise ZeroIQR(f"Q(75) == Q(25) for model {q.model_id!r}, region {q.region_id!r}")
    sk = (q.q75 + q.q25 - 2 * q.q50) / iqr
    return min(1.0, max(-1.0, sk))


def fit_gamma_to_quantiles(q: QuantileSet, cfg: GammaFitConfig | None = None) -> GammaFitResult:
    """Fit a location-shifted gamma to the percentiles at ``cfg.levels``.

    Negatively skewed inputs are reflected first. Percentiles are then
    rescaled to ``[0, 1]`` over the 5-95 spread; the swarm searches
    ``log10(shape)`` and ``log10(rate)`` while the location offset is solved
    in closed form (least squares, capped so every matched percentile lies in
    the support). Results are mapped back to the original scale.
    """
    cfg = cfg or GammaFitConfig()
    sk = bowley_skewness(q)
    reflected = sk < 0

    qa = np.asarray(q.q, dtype=float)
    # the level set is symmetric, so reversing after negation keeps levels aligned
    t = -qa[::-1] if reflected else qa
    lo, spread = t[0], t[-1] - t[0]
    x = (t - lo) / spread

    try:
        idx = [LEVELS.index(round(p * 100)) for p in cfg.levels]
    except ValueError:
        raise ValueError(f"gamma levels must be among {LEVELS} percent") from None
    probs = np.asarray(cfg.levels, dtype=float)
    xs = x[idx]

    def profile(params):
        params = np.atleast_2d(params)
        shape = 10.0 ** params[:, 0]
        rate = 10.0 ** params[:, 1]
        with np.errstate(all="ignore"):
            g = special.gammaincinv(shape[:, None], probs[None, :]) / rate[:, None]
            off = np.minimum((xs - g).mean(axis=1), 0.0)
            resid = off[:, None] + g - xs
            return (resid * resid).sum(axis=1), off

    def objective(params):
        return profile(params)[0]

    # method-of-moments seed from the median and the wider 90% gap
    off0 = -cfg.offset_margin
    m0 = x[2] - off0
    sd0 = max(x[4] - x[2], x[2] - x[0]) / normal_quantile(0.95)
    seed = np.clip(
        [np.log10((m0 / sd0) ** 2), np.log10(m0 / sd0**2)],
        [_LOG_SHAPE_BOX[0], _LOG_RATE_BOX[0]],
        [_LOG_SHAPE_BOX[1], _LOG_RATE_BOX[1]],
    )

    best, value = pso_minimize(
        objective,
        [_LOG_SHAPE_BOX[0], _LOG_RATE_BOX[0]],
        [_LOG_SHAPE_BOX[1], _LOG_RATE_BOX[1]],
        cfg,
        x0=seed,
        vectorized=True,
    )
    if not np.isfinite(value) or value > cfg.max_objective:
        raise GammaFitFailure(
            f"gamma fit for model {q.model_id!r}, region {q.region_id!r} reached "
            f"objective {value:.3g} > {cfg.max_objective:.3g}"
        )

    shape = 10.0 ** best[0]
    rate_unit = 10.0 ** best[1]
    off_unit = float(profile(best)[1][0])

    rate = rate_unit / spread
    offset = lo + off_unit * spread
    mean = offset + shape / rate
    sd = np.sqrt(shape) / rate
    if reflected:
        offset, mean = -offset, -mean
    return GammaFitResult(
        shape=float(shape),
        rate=float(rate),
        offset=float(offset),
        reflected=bool(reflected),
        mean=float(mean),
        sd=float(sd),
        objective_value=float(value),
    )


def fit_summary(
    q: QuantileSet,
    cfg: PrepConfig | None = None,
    force_path: FitPath | None = None,
) -> FittedSummary:
    """Reduce a quantile set to (y_hat, se_hat) using the skewness gate.

    ``force_path`` overrides the gate (used e.g. when inputs were rounded and
    the gate decision is known from elsewhere). Point masses and zero-IQR
    inputs bypass the gate and are flagged ``degenerate``.
    """
    cfg = cfg or PrepConfig()
    se_star = conservative_se(q, cfg.alpha)
    common = dict(model_id=q.model_id, region_id=q.region_id, measure=q.measure)

    if q.degenerate:
        return FittedSummary(
            **common, y_hat=q.q50, se_hat=0.0, sk=0.0, se_star=0.0,
            path=FitPath.Normal, degenerate=True,
        )
    try:
        sk = bowley_skewness(q)
    except ZeroIQR:
        return FittedSummary(
            **common, y_hat=q.q50, se_hat=se_star, sk=0.0, se_star=se_star,
            path=FitPath.Normal, degenerate=True,
        )

    path = force_path
    if path is None:
        path = FitPath.Gamma if abs(sk) > cfg.skew_threshold else FitPath.Normal
    if path is FitPath.Normal:
        return FittedSummary(
            **common, y_hat=q.q50, se_hat=se_star, sk=sk, se_star=se_star, path=path
        )

    fit = fit_gamma_to_quantiles(q, cfg.gamma_fit)
    return FittedSummary(
        **common, y_hat=fit.mean, se_hat=fit.sd, sk=sk, se_star=se_star, path=path
    )
