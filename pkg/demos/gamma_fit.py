"""
Fitting a gamma distribution to skewed percentiles
==================================================

When the quartiles are lopsided, a normal approximation misplaces the mean.
A shifted gamma is matched to the percentiles instead.
"""

import numpy as np

from metapool import (
    GammaFitConfig,
    OutcomeMeasure,
    bowley_skewness,
    conservative_se,
    fit_gamma_to_quantiles,
    gamma_quantile,
    validate_quantiles,
)

levels = np.array([0.05, 0.25, 0.50, 0.75, 0.95])

# percentiles of a gamma with shape 1.5 and rate 4, shifted right by 0.3
shape, rate, shift = 1.5, 4.0, 0.3
q = validate_quantiles(shift + gamma_quantile(levels, shape, rate), OutcomeMeasure.ReproductionNumber)
print("percentiles:", np.round(q.q, 4))
print(f"Bowley skewness {bowley_skewness(q):+.3f}  (gate at 0.5)")

true_mean, true_sd = shift + shape / rate, np.sqrt(shape) / rate
print(f"truth:           mean {true_mean:.4f}  sd {true_sd:.4f}")
print(f"normal shortcut: mean {q.q50:.4f}  sd {conservative_se(q):.4f}")

fit = fit_gamma_to_quantiles(q)
print(f"gamma fit:       mean {fit.mean:.4f}  sd {fit.sd:.4f}"
      f"  (shape {fit.shape:.3f}, rate {fit.rate:.3f}, offset {fit.offset:+.4f})")

# left skew is handled by reflecting, fitting and reflecting back
mirror = validate_quantiles([-x for x in reversed(q.q)], OutcomeMeasure.GrowthRate)
back = fit_gamma_to_quantiles(mirror)
print(f"mirrored:        mean {back.mean:.4f}  sd {back.sd:.4f}  reflected={back.reflected}")

# the swarm is seeded, so a fit is reproducible; other seeds agree closely
for seed in (0, 1, 2):
    f = fit_gamma_to_quantiles(q, GammaFitConfig(seed=seed))
    print(f"seed {seed}: mean {f.mean:.6f}  sd {f.sd:.6f}  objective {f.objective_value:.2e}")
