"""
Pooling eleven model estimates of R for one region
===================================================

Each model reports five percentiles. They are reduced to a point estimate
and a standard error, then pooled with equal weights.
"""

import csv
from pathlib import Path

from metapool import (
    FitPath,
    IntervalMethod,
    OutcomeMeasure,
    Weighting,
    build_forest,
    combine_region,
    fit_summary,
    render_svg,
    validate_quantiles,
)
from metapool.report import echo

here = Path(__file__).parent
rows = [r for r in csv.DictReader(open(here / "data" / "quantiles.csv")) if r["region"] == "region10"]

# validate and summarise each model; model8 reported nothing for this region
summaries = []
for r in rows:
    q = validate_quantiles([r[c] for c in ("q5", "q25", "q50", "q75", "q95")],
                           OutcomeMeasure.from_tag(r["measure"]), r["model"], r["region"])
    s = fit_summary(q)
    summaries.append(s)
    print(f"{s.model_id:<8} SK={s.sk:+.4f}  se*={s.se_star:.4f}  path={s.path.value:<6}"
          f"  y={s.y_hat:.4f}  se={s.se_hat:.4f}")

# model5's quantiles are tightly bunched and mildly skewed; the rounded
# inputs sit under the skew gate, but the gamma path can be forced
m5 = next(r for r in rows if r["model"] == "model5")
q5 = validate_quantiles([m5[c] for c in ("q5", "q25", "q50", "q75", "q95")],
                        OutcomeMeasure.ReproductionNumber, "model5", "region10")
g = fit_summary(q5, force_path=FitPath.Gamma)
print(f"\nmodel5 via gamma fit: y={g.y_hat:.4f}  se={g.se_hat:.4f}")

# the two interval methods, plus inverse-variance weights for contrast
print()
results = []
for method in (IntervalMethod.Wald, IntervalMethod.KNHA):
    res = combine_region(summaries, Weighting.Equal, method, alpha=0.10)
    results.append(res)
    text = echo(res.theta_hat, (res.ci_low, res.ci_high), (res.cr_low, res.cr_high))
    print(f"{method.value:<5} k={res.k}  {text}  tau2={res.tau2:.6f} (se {res.se_tau2:.6f})")

iv = combine_region(summaries, Weighting.InverseVariance, IntervalMethod.Wald)
print(f"inverse-variance weights: theta={iv.theta_hat:.3f}")

# forest plot: per-model 90% intervals, then each pooled CI with its CR
svg = render_svg(build_forest(summaries, results), "R, region10", OutcomeMeasure.ReproductionNumber)
out = here / "region10_forest.svg"
out.write_text(svg)
print(f"\nwrote {out}")
