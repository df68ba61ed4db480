"""
Which features predict the recognition gap?
===========================================

Fits a linear model of diff.HRS on pair features and lets AIC stepwise
selection drop the terms that do not pay their way.
"""

import numpy as np

from lexrobust.regression import DesignMatrix, format_table, ols_fit, stepwise_select

rng = np.random.default_rng(11)
n = 90

# Feature columns shaped like the real ones: log probabilities, phoneme counts, STOI
log_prob = rng.normal(-7, 2, n)
diff_log_prob = rng.normal(0, 2, n)
ph_len = rng.integers(2, 9, n).astype(float)
diff_ph_len = rng.integers(-4, 5, n).astype(float)
stoi = rng.uniform(0.4, 0.9, n)
diff_stoi = rng.normal(0, 0.15, n)

# Only diff.log.prob and diff.STOI matter here
diff_hrs = 0.2 + 0.03 * diff_log_prob + 0.6 * diff_stoi + rng.normal(0, 0.08, n)

names = ("log.prob", "diff.log.prob", "ph.len", "diff.ph.len", "STOI", "diff.STOI")
design = DesignMatrix(
    np.column_stack([log_prob, diff_log_prob, ph_len, diff_ph_len, stoi, diff_stoi]),
    diff_hrs, names, "diff.HRS",
)

print(format_table(ols_fit(design), "Full model"))

result = stepwise_select(design, direction="both")
print("\nSelection trace (AIC of each candidate move):")
for step in result.trace:
    moves = ", ".join(f"{c.move} {c.term or ''}".strip() + f" {c.aic:.1f}" for c in step.candidates)
    print(f"  at AIC {step.aic:.2f}: {moves}")
print()
print(format_table(result.fit, f"Selected: {', '.join(result.selected)}"))
