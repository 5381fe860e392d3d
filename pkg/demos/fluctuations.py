"""
Fluctuations of the cell energy
===============================

Checkerboard medium, cells of fixed height 8.  The variance of X should
fall roughly like t^{1-d} ell, so Var * t / ell stays put as t grows.
"""

from homoglab import FieldModel
from homoglab.stats import (
    ExperimentPlan,
    HeightRule,
    concentration_check,
    run_ensemble,
    summarize,
    variance_scaling_fit,
)

plan = ExperimentPlan(FieldModel.checkerboard(), ts=(16, 32, 64, 128), rule=HeightRule("fixed", 8), replicates=60)
records = run_ensemble(plan)

summaries = summarize(records, p_max=2)
for s in summaries:
    print(f"t={s.t:5g}  mean={s.mean:.4f}  var={s.var:.3e}  m4/m2^2={s.central[4] / s.central[2] ** 2:.2f}")

fit = variance_scaling_fit(summaries)
print(f"log-log slope {fit.slope:.2f} (reference {fit.reference_exponent:g}), R^2 {fit.r2:.3f}")
print("Var * t / ell:", [round(r, 4) for r in fit.ratios])

# exponential moments of the normalized fluctuation (bounded by 4 when C is large enough)
at64 = [r for r in records if r.t == 64]
for C in (1, 5, 20):
    print(f"C={C:3d}  exp-moment={concentration_check(at64, C)[0]:.3f}")
