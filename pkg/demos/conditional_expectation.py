"""The exact conditional expectation of diagonal overlaps and its limits.

The expectation of O_ii given an eigenvalue at squared radius X is an
explicit rational function of X.  Deep in the bulk it grows like
N (1 - X); within O(1/N) of the unit circle it crosses over to a finite
edge profile.  A small Monte Carlo run shows the binned empirical means
riding the exact curve.
"""

import numpy as np

from tue_overlaps import (
    ExperimentConfig,
    bulk_limit,
    edge_limit,
    expectation_scan,
    expected_diag_overlap_tue1,
)

N = 20

print(f"exact expectation at N={N}:")
for x in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
    print(f"  X={x:4.2f}: E[O_ii] = {expected_diag_overlap_tue1(N, x):9.4f}   "
          f"bulk approx N(1-X) = {N * bulk_limit(x):9.4f}")

print("\nedge profile (kappa = N (1 - X)):")
for kappa in (0.5, 1.0, 2.0, 5.0):
    finite = expected_diag_overlap_tue1(10_000, 1 - kappa / 10_000)
    print(f"  kappa={kappa:3.1f}: limit {edge_limit(kappa):8.5f}   "
          f"N=10^4 value {finite:8.5f}")

print("\nMonte Carlo check (binned means over all eigenvalues):")
scan = expectation_scan(ExperimentConfig(n=N, trials=2000, seed=5, bins=10, workers=2))
print(f"  {scan.samples_used} samples used, "
      f"{scan.samples_discarded_degenerate} degenerate discards")
print("  bin center   count   empirical     exact      ratio")
for row in scan.rows:
    if row["count"] == 0:
        continue
    print(f"  {row['bin_center']:10.3f} {row['count']:7d} "
          f"{row['empirical_mean']:11.4f} {row['expected_mean']:10.4f} "
          f"{row['ratio']:9.4f}{'   (sparse)' if row['sparse'] else ''}")
