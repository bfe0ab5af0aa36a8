"""Dense complex linear algebra for the truncation pipeline.

Provides Householder QR, Hessenberg reduction, a complex Schur decomposition
(single-shift QR iteration with Wilkinson shift and deflation), triangular
eigenvector extraction by back-substitution, and bi-orthogonality checks.

Conventions used throughout the package:

* A Schur form is ``a = q @ t @ q.conj().T`` with ``q`` unitary and ``t``
  upper triangular; the eigenvalue vector is exactly ``diag(t)`` in the
  order produced by deflation.  Nothing downstream re-sorts it.
* Left eigenvectors are rows ``L[i]`` with ``L[i] @ t = lam[i] * L[i]`` and
  ``L[i][i] == 1``; right eigenvectors are columns ``R[:, j]`` with
  ``t @ R[:, j] = lam[j] * R[:, j]`` and ``R[j][j] == 1``.  With this
  normalization the plain (unconjugated) products satisfy
  ``L @ R == identity``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateSpectrumError",
    "NonConvergenceError",
    "SchurForm",
    "EigenSystem",
    "qr_decompose",
    "hessenberg",
    "schur_decompose",
    "triangular_eigenvectors",
    "biorthogonality_residual",
]

DEFAULT_DEFLATION_TOL = 1e-12
DEFAULT_GAP_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 60


class NonConvergenceError(RuntimeError):
    """QR iteration failed to deflate a sub-block within the sweep budget."""

    def __init__(self, lo: int, hi: int, max_sweeps: int):
        self.block = (lo, hi)
        self.max_sweeps = max_sweeps
        super().__init__(
            f"QR iteration failed to deflate rows {lo}..{hi} within "
            f"{max_sweeps} sweeps"
        )


class DegenerateSpectrumError(ValueError):
    """Two eigenvalues are closer than the requested gap tolerance."""

    def __init__(self, gap: float, gap_tol: float):
        self.gap = gap
        self.gap_tol = gap_tol
        super().__init__(
            f"minimal eigenvalue gap {gap:.3e} is at or below gap_tol {gap_tol:.3e}"
        )


@dataclass
class SchurForm:
    """Unitary ``q`` and upper-triangular ``t`` with ``a = q t q*``."""

    q: np.ndarray
    t: np.ndarray
    eigenvalues: np.ndarray


@dataclass
class EigenSystem:
    """Unit-diagonal left rows and right columns of a triangular matrix.

    ``left[i]`` is zero before index ``i`` with ``left[i, i] == 1``;
    ``right[:, j]`` is zero after index ``j`` with ``right[j, j] == 1``.
    """

    left: np.ndarray
    right: np.ndarray
    eigenvalues: np.ndarray


def _as_square(a, name: str = "a") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _householder_vector(x: np.ndarray):
    """Unit reflector ``v`` and target ``alpha`` with ``(I - 2 v v*) x == alpha e1``.

    ``alpha = -phase(x[0]) * ||x||`` avoids cancellation in ``x[0] - alpha``.
    """
    normx = np.linalg.norm(x)
    if normx == 0.0:
        return None, 0.0 + 0.0j
    x0 = x[0]
    phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
    alpha = -phase * normx
    v = x.astype(complex, copy=True)
    v[0] -= alpha
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        return None, alpha
    return v / vnorm, alpha


def qr_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR of a square complex matrix.

    Returns ``(q, r)`` with ``q`` unitary, ``r`` upper triangular and the
    diagonal of ``r`` real and non-negative (the factorization is then
    unique for nonsingular input, which is what makes the Ginibre-to-Haar
    construction in :mod:`tue_overlaps.ensembles` valid).
    """
    a = _as_square(a)
    n = a.shape[0]
    r = a.copy()
    q = np.eye(n, dtype=complex)
    for k in range(n - 1):
        v, alpha = _householder_vector(r[k:, k])
        if v is None:
            continue
        r[k:, k:] -= 2.0 * np.outer(v, v.conj() @ r[k:, k:])
        q[:, k:] -= 2.0 * np.outer(q[:, k:] @ v, v.conj())
        r[k, k] = alpha
        r[k + 1:, k] = 0.0
    # rotate column phases so that diag(r) is real >= 0
    d = np.diagonal(r).copy()
    mod = np.abs(d)
    ph = np.where(mod > 0.0, d / np.where(mod > 0.0, mod, 1.0), 1.0 + 0.0j)
    q *= ph
    r *= ph.conj()[:, None]
    idx = np.arange(n)
    r[idx, idx] = mod
    return q, r


def hessenberg(a) -> tuple[np.ndarray, np.ndarray]:
    """Reduce ``a`` to upper Hessenberg form ``h = q* a q`` by Householder reflectors."""
    a = _as_square(a)
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        v, alpha = _householder_vector(h[k + 1:, k])
        if v is None:
            h[k + 2:, k] = 0.0
            continue
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 1, k] = alpha
        h[k + 2:, k] = 0.0
    return h, q


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    """Eigenvalue of the trailing 2x2 block closest to ``h[hi, hi]``."""
    a = h[hi - 1, hi - 1]
    b = h[hi - 1, hi]
    c = h[hi, hi - 1]
    d = h[hi, hi]
    tr = a + d
    disc = np.sqrt(complex(tr * tr - 4.0 * (a * d - b * c)))
    mu1 = 0.5 * (tr + disc)
    mu2 = 0.5 * (tr - disc)
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_step(h: np.ndarray, q: np.ndarray, lo: int, hi: int, shift: complex) -> None:
    """One explicit single-shift QR step on the active window ``[lo, hi]``.

    Applies the window similarity to the coupled off-window blocks and
    accumulates it into ``q``.
    """
    n = h.shape[0]
    m = hi + 1 - lo
    w = h[lo:hi + 1, lo:hi + 1].copy()
    idx = np.arange(m)
    w[idx, idx] -= shift
    qs, rs = np.linalg.qr(w)
    new = rs @ qs
    new[idx, idx] += shift
    h[lo:hi + 1, lo:hi + 1] = new
    if hi + 1 < n:
        h[lo:hi + 1, hi + 1:] = qs.conj().T @ h[lo:hi + 1, hi + 1:]
    if lo > 0:
        h[:lo, lo:hi + 1] = h[:lo, lo:hi + 1] @ qs
    q[:, lo:hi + 1] = q[:, lo:hi + 1] @ qs


def schur_decompose(
    a,
    tol: float = DEFAULT_DEFLATION_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SchurForm:
    """Complex Schur decomposition ``a = q t q*``.

    Hessenberg reduction by Householder reflectors followed by single-shift
    QR iteration with the Wilkinson shift of the trailing 2x2 block.  A
    sub-diagonal entry ``h[k+1, k]`` deflates once it drops below
    ``tol * (|h[k, k]| + |h[k+1, k+1]|)``.  Every ten stalled sweeps an
    exceptional shift is taken to break symmetric cycling.

    The eigenvalue vector is ``diag(t)`` in deflation order and is never
    re-sorted here.

    Raises
    ------
    NonConvergenceError
        If some eigenvalue fails to deflate within ``max_sweeps`` sweeps;
        the exception carries the offending row block.
    """
    a = _as_square(a)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = a.shape[0]
    if not np.any(np.tril(a, -1)):
        # already triangular: nothing to do beyond the sub-diagonal cleanup
        t = np.triu(a)
        return SchurForm(q=np.eye(n, dtype=complex), t=t, eigenvalues=np.diagonal(t).copy())
    h, q = hessenberg(a)
    hi = n - 1
    sweeps = 0
    while hi > 0:
        k = hi
        while k > 0:
            thresh = tol * (abs(h[k - 1, k - 1]) + abs(h[k, k]))
            if thresh == 0.0:
                thresh = tol
            if abs(h[k, k - 1]) <= thresh:
                break
            k -= 1
        lo = k
        if lo > 0:
            h[lo, lo - 1] = 0.0
        if lo == hi:
            hi -= 1
            sweeps = 0
            continue
        if sweeps >= max_sweeps:
            raise NonConvergenceError(lo, hi, max_sweeps)
        if sweeps and sweeps % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            shift = _wilkinson_shift(h, hi)
        _qr_step(h, q, lo, hi, shift)
        sweeps += 1
    h[np.tril_indices(n, -1)] = 0.0
    return SchurForm(q=q, t=h, eigenvalues=np.diagonal(h).copy())


def min_eigengap(eigenvalues) -> float:
    """Smallest pairwise distance between eigenvalues (inf for a single one)."""
    lam = np.asarray(eigenvalues, dtype=complex)
    n = lam.size
    if n < 2:
        return math.inf
    diff = np.abs(lam[:, None] - lam[None, :])
    diff[np.diag_indices(n)] = math.inf
    return float(diff.min())


def triangular_eigenvectors(t, gap_tol: float = DEFAULT_GAP_TOL) -> EigenSystem:
    """Left and right eigenvectors of an upper-triangular matrix.

    Back-substitution on ``t`` gives exact unit diagonals and exact zero
    patterns, so the family is bi-orthogonal by construction rather than
    by renormalization: ``left @ right`` equals the identity up to
    roundoff.

    Raises
    ------
    DegenerateSpectrumError
        If any pairwise diagonal gap is at or below ``gap_tol``.
    """
    t = _as_square(t, "t")
    if np.any(np.tril(t, -1)):
        raise ValueError("t must be upper triangular")
    n = t.shape[0]
    lam = np.diagonal(t).copy()
    gap = min_eigengap(lam)
    if gap <= gap_tol:
        raise DegenerateSpectrumError(gap, gap_tol)
    right = np.zeros((n, n), dtype=complex)
    left = np.zeros((n, n), dtype=complex)
    for j in range(n):
        right[j, j] = 1.0
        for i in range(j - 1, -1, -1):
            right[i, j] = (t[i, i + 1:j + 1] @ right[i + 1:j + 1, j]) / (lam[j] - lam[i])
    for i in range(n):
        left[i, i] = 1.0
        for j in range(i + 1, n):
            left[i, j] = (left[i, i:j] @ t[i:j, j]) / (lam[i] - lam[j])
    return EigenSystem(left=left, right=right, eigenvalues=lam)


def biorthogonality_residual(es: EigenSystem) -> float:
    """``max_{i,j} |<L_i, R_j> - delta_ij>|`` with the plain row-by-column product."""
    n = es.eigenvalues.size
    return float(np.abs(es.left @ es.right - np.eye(n)).max())
