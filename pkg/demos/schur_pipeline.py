"""Walk through the numeric pipeline on a single truncation sample.

Sample a Haar unitary, truncate it, Schur-decompose the truncation, build
the bi-orthogonal eigenvector family, and check every structural identity
along the way.
"""

import numpy as np

from tue_overlaps import (
    RngStream,
    biorthogonality_residual,
    border_vector_v,
    border_vector_w,
    predicted_v_moduli,
    predicted_w_moduli,
    sample_tue,
    schur_decompose,
    triangular_eigenvectors,
)

N = 8
stream = RngStream(master_seed=7, stream_index=0)

ts = sample_tue(N, 1, stream)
u = ts.parent_unitary()
print(f"parent unitary size {u.shape}, unitarity residual "
      f"{np.abs(u @ u.conj().T - np.eye(N + 1)).max():.2e}")

sf = schur_decompose(ts.g)
print(f"schur reconstruction residual "
      f"{np.abs(sf.q @ sf.t @ sf.q.conj().T - ts.g).max():.2e}")
print("eigenvalue moduli:", np.round(np.abs(sf.eigenvalues), 4))

es = triangular_eigenvectors(sf.t)
print(f"bi-orthogonality residual {biorthogonality_residual(es):.2e}")

# the bordering column/row of the parent unitary, rotated into the Schur
# basis, have moduli that are deterministic functions of the eigenvalues
v = border_vector_v(ts, sf)
w = border_vector_w(ts, sf)
pv = predicted_v_moduli(sf.eigenvalues)
pw = predicted_w_moduli(sf.eigenvalues)
print(f"|v_k|^2 vs prediction, worst rel err "
      f"{np.abs(np.abs(v) ** 2 / pv - 1).max():.2e}")
print(f"|w_k|^2 vs prediction, worst rel err "
      f"{np.abs(np.abs(w) ** 2 / pw - 1).max():.2e}")
print(f"telescoping: sum |v_k|^2 = {np.sum(np.abs(v) ** 2):.12f}, "
      f"1 - prod |lam|^2 = {1 - np.prod(np.abs(sf.eigenvalues) ** 2):.12f}")
