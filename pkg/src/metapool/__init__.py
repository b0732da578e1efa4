"""Pool epidemic outcome estimates from several models.

Per-model percentiles are reduced to (mean, standard error) pairs, then
combined with an equally weighted random-effects model (REML heterogeneity,
Wald or Knapp-Hartung intervals, prediction intervals).
"""

from .exceptions import MetapoolError
from .meta import IntervalMethod, PoolResult, Weighting, combine_region, pool, reml_tau2
from .optim import GammaFitConfig, gamma_cdf, gamma_quantile, normal_quantile, pso_minimize, t_quantile
from .prep import (
    GammaFitResult,
    PrepConfig,
    bowley_skewness,
    conservative_se,
    fit_gamma_to_quantiles,
    fit_summary,
)
from .reliability import RegionSignal, ReliabilityConfig, death_proxy, heterogeneity, reliability_score
from .report import ForestRow, RowKind, build_forest, render_svg, serialize_results
from .types import (
    Dataset,
    FitPath,
    FittedSummary,
    OutcomeMeasure,
    QuantileSet,
    group_for_pooling,
    validate_quantiles,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FitPath", "FittedSummary", "ForestRow", "GammaFitConfig", "GammaFitResult",
    "IntervalMethod", "MetapoolError", "OutcomeMeasure", "PoolResult", "PrepConfig",
    "QuantileSet", "RegionSignal", "ReliabilityConfig", "RowKind", "Weighting",
    "bowley_skewness", "build_forest", "combine_region", "conservative_se", "death_proxy",
    "fit_gamma_to_quantiles", "fit_summary", "gamma_cdf", "gamma_quantile", "group_for_pooling",
    "heterogeneity", "normal_quantile", "pool", "pso_minimize", "reliability_score",
    "reml_tau2", "render_svg", "serialize_results", "t_quantile", "validate_quantiles",
]
