"""Particle-swarm minimiser and the distribution quantiles used by the pipeline.

The quantile functions are thin, domain-checked wrappers around
:mod:`scipy.special`; they accept scalars or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .exceptions import DomainError, InvalidBounds

__all__ = [
    "GammaFitConfig",
    "pso_minimize",
    "normal_quantile",
    "t_quantile",
    "gamma_cdf",
    "gamma_quantile",
]


@dataclass(frozen=True)
class GammaFitConfig:
    """Swarm settings plus the knobs of the quantile-matching gamma fit.

    The swarm constants default to the constriction-coefficient PSO
    (chi = 0.7298, c1 = c2 = 1.49618).

    Attributes
    ----------
    swarm_size, max_iters : int
        Number of particles and hard iteration cap.
    inertia, cognitive, social : float
        Velocity update coefficients.
    tolerance : float
        Minimum decrease of the best objective that resets the stall counter.
    stall_iters : int
        Stop after this many iterations without a decrease larger than
        ``tolerance``.
    seed : int
        Seed for the swarm's private random generator.
    levels : tuple of float
        Probability levels matched by the gamma fit. Must be a subset of the
        five reported percentiles.
    offset_margin : float
        Initial location shift below the lowest transformed percentile, as a
        fraction of the 5-95 spread; only used to seed the swarm.
    max_objective : float
        Largest acceptable spread-normalised sum of squared quantile errors;
        a worse best fit raises :class:`~metapool.exceptions.GammaFitFailure`.
    """

    swarm_size: int = 40
    max_iters: int = 500
    inertia: float = 0.7298
    cognitive: float = 1.49618
    social: float = 1.49618
    tolerance: float = 1e-10
    stall_iters: int = 50
    seed: int = 0
    levels: tuple[float, ...] = (0.05, 0.50, 0.95)
    offset_margin: float = 0.1
    max_objective: float = 1e-2

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.max_iters < 1 or self.stall_iters < 1:
            raise ValueError("max_iters and stall_iters must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")


def pso_minimize(
    objective: Callable,
    lower,
    upper,
    cfg: GammaFitConfig | None = None,
    x0=None,
    vectorized: bool = False,
) -> tuple[np.ndarray, float]:
    """Minimise ``objective`` over the box ``[lower, upper]`` with a global-best swarm.

    Parameters
    ----------
    objective : callable
        Maps a 1-D position to a float. With ``vectorized=True`` it instead
        receives an ``(n_particles, n_dim)`` array and returns ``n_particles``
        values.
    lower, upper : array_like
        Box bounds; ``lower < upper`` componentwise.
    cfg : GammaFitConfig, optional
        Swarm settings; defaults to ``GammaFitConfig()``.
    x0 : array_like, optional
        Seed position placed in the initial swarm (clipped to the box).

    Returns
    -------
    x : ndarray
        Best position found; always inside the box.
    value : float
        Objective at ``x``.
    """
    cfg = cfg or GammaFitConfig()
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or lower.ndim != 1:
        raise InvalidBounds("lower and upper must be 1-D and the same length")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise InvalidBounds("bounds must be finite")
    if np.any(lower >= upper):
        raise InvalidBounds("lower must be strictly below upper in every dimension")

    n, d = cfg.swarm_size, lower.size
    span = upper - lower
    rng = np.random.default_rng(cfg.seed)

    def evaluate(pos):
        if vectorized:
            vals = np.asarray(objective(pos), dtype=float).reshape(n)
        else:
            vals = np.array([objective(p) for p in pos], dtype=float)
        return np.where(np.isfinite(vals), vals, np.inf)

    x = lower + rng.random((n, d)) * span
    if x0 is not None:
        x[0] = np.clip(np.asarray(x0, dtype=float), lower, upper)
    v = (lower + rng.random((n, d)) * span - x) / 2.0

    f = evaluate(x)
    pbest, pbest_f = x.copy(), f.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), pbest_f[g]
    ref_f, stall = gbest_f, 0

    for _ in range(cfg.max_iters):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        v = (
            cfg.inertia * v
            + cfg.cognitive * r1 * (pbest - x)
            + cfg.social * r2 * (gbest - x)
        )
        np.clip(v, -span, span, out=v)
        x = x + v
        hit = (x < lower) | (x > upper)
        x = np.clip(x, lower, upper)
        v[hit] = 0.0

        f = evaluate(x)
        better = f < pbest_f
        pbest[better] = x[better]
        pbest_f[better] = f[better]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), pbest_f[g]

        if ref_f - gbest_f > cfg.tolerance:
            ref_f, stall = gbest_f, 0
        else:
            stall += 1
            if stall >= cfg.stall_iters:
                break

    return gbest, float(gbest_f)


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0) | ~(p < 1)):
        raise DomainError("probability must lie strictly inside (0, 1)")
    return p


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def normal_quantile(p):
    """Inverse of the standard normal CDF."""
    return _out(special.ndtri(_check_prob(p)))


def t_quantile(p, df):
    """Inverse of the Student-t CDF with ``df`` degrees of freedom."""
    p = _check_prob(p)
    df = np.asarray(df, dtype=float)
    if np.any(~(df > 0)):
        raise DomainError("df must be positive")
    return _out(special.stdtrit(df, p))


def _check_gamma(shape, rate):
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(rate > 0)):
        raise DomainError("shape and rate must be positive")
    return shape, rate


def gamma_cdf(x, shape, rate):
    """Gamma CDF (shape/rate parameterisation)."""
    shape, rate = _check_gamma(shape, rate)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _out(special.gammainc(shape, x * rate))


def gamma_quantile(p, shape, rate):
    """Inverse gamma CDF (shape/rate parameterisation)."""
    p = _check_prob(p)
    shape, rate = _check_gamma(shape, rate)
    return _out(special.gammaincinv(shape, p) / rate)
