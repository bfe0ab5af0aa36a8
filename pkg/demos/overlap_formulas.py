"""Numeric eigenvector overlaps against their eigenvalue-only closed forms.

For a rank-one truncation every generalized overlap is a deterministic
function of the eigenvalues: the two engines must agree to near machine
precision, sample by sample.
"""

import numpy as np

from tue_overlaps import (
    OverlapCycle,
    RngStream,
    diagonal_overlap_formula,
    diagonal_overlaps_numeric,
    offdiag_overlap_formula,
    q_overlap_formula,
    q_overlap_numeric,
    sample_tue,
    schur_decompose,
    triangular_eigenvectors,
)

N = 8
ts = sample_tue(N, 1, RngStream(11, 0))
sf = schur_decompose(ts.g)
es = triangular_eigenvectors(sf.t)
lam = sf.eigenvalues

print("diagonal overlaps (squared eigenvalue condition numbers):")
numeric = diagonal_overlaps_numeric(es)
for i in range(N):
    formula = diagonal_overlap_formula(lam, i)
    print(f"  O_{i}{i}: numeric {numeric[i]:12.6f}  formula {formula:12.6f}  "
          f"rel err {abs(numeric[i] - formula) / formula:.2e}")

print("\noff-diagonal overlaps, a few pairs:")
for i, j in [(0, 1), (2, 5), (6, 3)]:
    num = q_overlap_numeric(es, OverlapCycle((i, j)))
    form = offdiag_overlap_formula(lam, i, j)
    print(f"  O_{i}{j}: numeric {num:.6f}  formula {form:.6f}")

print("\nhigher-order cycles:")
gen = np.random.default_rng(3)
for _ in range(4):
    q = int(gen.integers(1, 4))
    cycle = OverlapCycle(tuple(int(v) for v in gen.integers(0, N, size=2 * q)))
    num = q_overlap_numeric(es, cycle)
    form = q_overlap_formula(lam, cycle)
    rel = abs(num - form) / max(abs(num), abs(form))
    print(f"  cycle {cycle.indices}: |numeric - formula| / scale = {rel:.2e}")
