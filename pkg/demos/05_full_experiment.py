"""End-to-end experiment on the toy bundle: predictors, fusion, evaluation.

Equivalent to `qppfuse experiment --config data/toy/experiment.cfg --out
runs/demo` but driving the library directly and pretty-printing the report.

Run from the repository root:  python3 demos/05_full_experiment.py
"""

import logging
from pathlib import Path

from qppfuse import ExperimentConfig, run_experiment

logging.basicConfig(level=logging.ERROR)  # the 6-query fits warn a lot

TOY = Path(__file__).resolve().parents[1] / "data" / "toy"

config = ExperimentConfig.from_file(TOY / "experiment.cfg")
config.repeats = 10  # 30 in the shipped config; fewer here to keep it snappy
config.out = ""      # no artifacts, just the in-memory result

result = run_experiment(config)

# ---------------------------------------------------------------------------
# Aggregate report: single predictors first, then the combiners. Every
# number is the mean over the 10 random half splits.
print(f"{len(result.table.query_ids)} queries, {len(result.plan.pairs)} splits")
print(f"\n{'predictor':<12} {'tau':>8} {'rho':>8} {'sMARE':>8} {'RMSE':>8} {'p':>8}")
for row in result.aggregate:
    p = f"{row.p_value:8.4f}" if row.p_value == row.p_value else "       -"
    print(f"{row.predictor:<12} {row.tau:8.4f} {row.rho:8.4f} "
          f"{row.smare:8.4f} {row.rmse:8.4f} {p}")

# ---------------------------------------------------------------------------
# How related are the predictors, and what does that predict about fusion?
corr = result.corr_matrix
print(f"\npairwise {corr.metric} correlations:")
print("            " + "  ".join(f"{n:>8}" for n in corr.names))
for i, name in enumerate(corr.names):
    cells = "  ".join(f"{v:8.4f}" for v in corr.matrix[i])
    print(f"{name:<12}{cells}")

h = result.hypothesis
print(f"\nregime: {h.regime} (mean rho {h.mean_rho:.3f}, "
      f"{h.frac_negative:.0%} of pairs below {h.thresholds['h3_rho']})")
print(f"best-combined minus best-single rho: {h.delta_rho:+.4f} "
      f"(consistent with {h.regime}: {h.consistent})")
