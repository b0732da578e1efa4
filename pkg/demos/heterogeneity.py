"""
Between-model variance and small-k intervals
============================================

The REML estimate of tau^2 drives both the prediction interval (CR) and,
through the residuals, the Knapp-Hartung interval. With few models the
Knapp-Hartung interval uses a t quantile with k - 1 degrees of freedom.
"""

import numpy as np

from metapool import IntervalMethod, pool, reml_tau2
from metapool.meta import restricted_loglik

y = np.array([0.74, 0.70, 0.74, 0.75, 0.79, 0.83])
v = np.array([0.079, 0.074, 0.070, 0.237, 0.003, 0.026]) ** 2

tau2, se = reml_tau2(y, v)
print(f"tau2 = {tau2:.6f}  (se {se:.6f})")

# the restricted likelihood around the estimate
for t in (0.0, tau2 / 2, tau2, 2 * tau2, 4 * tau2):
    print(f"  ll({t:.6f}) = {restricted_loglik(t, y, v):.5f}")

# intervals as models are added one at a time
print("\n k   wald CI             knha CI             CR (knha)")
for k in range(2, len(y) + 1):
    w = pool(y[:k], v[:k], method=IntervalMethod.Wald)
    h = pool(y[:k], v[:k], method=IntervalMethod.KNHA)
    print(f"{k:2d}   ({w.ci_low:.3f}, {w.ci_high:.3f})    ({h.ci_low:.3f}, {h.ci_high:.3f})"
          f"    [{h.cr_low:.3f}, {h.cr_high:.3f}]")

# counts cannot be negative: lower bounds are clamped and flagged
r = pool([5030, 1200, 2600], [1100.0**2, 300.0**2, 900.0**2], method=IntervalMethod.KNHA,
         nonnegative_measure=True)
print(f"\ninfections: {r.theta_hat:.0f} ({r.ci_low:.0f}, {r.ci_high:.0f}) "
      f"[{r.cr_low:.0f}, {r.cr_high:.0f}]  clamped={r.clamped_low}")
