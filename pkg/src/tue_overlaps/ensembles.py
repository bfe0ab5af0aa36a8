"""Samplers for Haar unitaries and their truncations.

A truncation sample keeps all four blocks of the parent ``(n+m) x (n+m)``
Haar unitary ``[[g, border_cols], [border_rows, corner]]`` so that the
rank-``m`` defect identities ``g g* = I - border_cols border_cols*`` and
``g* g = I - border_rows* border_rows`` can be checked and, for ``m = 1``,
carried through the Schur form.

Randomness is addressed by value: an :class:`RngStream` is a
``(master_seed, stream_index)`` pair mapped to a counter-based generator,
so identical pairs reproduce identical draws and distinct indices give
independent streams (this is what makes parallel Monte Carlo runs
aggregate to bit-identical results regardless of worker count).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SchurForm, qr_decompose

__all__ = [
    "RngStream",
    "TruncationSample",
    "sample_haar_unitary",
    "sample_tue",
    "kostlan_radii",
    "border_vector_v",
    "border_vector_w",
    "predicted_v_moduli",
    "predicted_w_moduli",
]


@dataclass(frozen=True)
class RngStream:
    """Reproducible stream address: (master seed, stream index)."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("master_seed and stream_index must be non-negative")
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass
class TruncationSample:
    """Top-left ``n x n`` block of a Haar unitary plus its bordering blocks."""

    g: np.ndarray
    border_cols: np.ndarray
    border_rows: np.ndarray
    corner: np.ndarray
    n: int
    m: int

    def parent_unitary(self) -> np.ndarray:
        top = np.hstack([self.g, self.border_cols])
        bottom = np.hstack([self.border_rows, self.corner])
        return np.vstack([top, bottom])


def _generator(rng) -> np.random.Generator:
    """Accept an RngStream (pure, derives a fresh generator) or a Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"rng must be RngStream or numpy Generator, got {type(rng)!r}")


def sample_haar_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary matrix.

    QR of a complex Ginibre matrix with the column phases fixed so that the
    diagonal of ``r`` is real positive; without the phase fix the QR of a
    Gaussian matrix is not Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _generator(rng)
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    q, _ = qr_decompose(z)
    return q


def sample_tue(n: int, m: int, rng) -> TruncationSample:
    """Sample the four blocks of a fresh Haar unitary of size ``n + m``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    u = sample_haar_unitary(n + m, rng)
    return TruncationSample(
        g=u[:n, :n].copy(),
        border_cols=u[:n, n:].copy(),
        border_rows=u[n:, :n].copy(),
        corner=u[n:, n:].copy(),
        n=n,
        m=m,
    )


def kostlan_radii(n: int, m: int, rng) -> np.ndarray:
    """The unordered set of squared eigenvalue radii, sampled directly.

    Returns ``n`` independent draws, the k-th distributed Beta(k, m),
    k = 1..n.  For ``m = 1`` the inverse CDF ``u**(1/k)`` is exact; for
    larger ``m`` the standard Gamma-ratio construction is used.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    gen = _generator(rng)
    k = np.arange(1, n + 1, dtype=float)
    if m == 1:
        u = gen.random(n)
        return u ** (1.0 / k)
    g1 = gen.gamma(shape=k)
    g2 = gen.gamma(shape=float(m), size=n)
    return g1 / (g1 + g2)


def border_vector_v(ts: TruncationSample, sf: SchurForm) -> np.ndarray:
    """Rotate the bordering column into the Schur basis: ``v = q* border_cols``.

    For an ``m = 1`` truncation with Schur form ``g = q t q*`` the parent
    unitarity gives ``t t* = I - v v*`` exactly; this is verified before
    returning.  Only the moduli of ``v`` and ratios ``v_i / v_j`` carry
    meaning downstream, so no global phase convention is imposed.
    """
    if ts.m != 1:
        raise ValueError(f"border vector requires a rank-one truncation, got m={ts.m}")
    v = (sf.q.conj().T @ ts.border_cols).ravel()
    n = ts.n
    residual = np.abs(sf.t @ sf.t.conj().T + np.outer(v, v.conj()) - np.eye(n)).max()
    if residual > 1e-8:
        raise ValueError(
            f"t t* + v v* - I has residual {residual:.3e}; "
            "sf is not a Schur form of ts.g"
        )
    return v


def border_vector_w(ts: TruncationSample, sf: SchurForm) -> np.ndarray:
    """Mirror of :func:`border_vector_v`: row vector with ``t* t = I - w* w``."""
    if ts.m != 1:
        raise ValueError(f"border vector requires a rank-one truncation, got m={ts.m}")
    w = (ts.border_rows @ sf.q).ravel()
    n = ts.n
    residual = np.abs(sf.t.conj().T @ sf.t + np.outer(w.conj(), w) - np.eye(n)).max()
    if residual > 1e-8:
        raise ValueError(
            f"t* t + w* w - I has residual {residual:.3e}; "
            "sf is not a Schur form of ts.g"
        )
    return w


def _squared_moduli_in_disk(eigenvalues) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=complex)
    r2 = np.abs(lam) ** 2
    if np.any(r2 >= 1.0):
        raise ValueError("all eigenvalue moduli must be < 1")
    return r2


def predicted_v_moduli(eigenvalues) -> np.ndarray:
    """``|v_k|^2 = (1 - |lam_k|^2) prod_{l > k} |lam_l|^2`` in diagonal order.

    The entries telescope: their sum is ``1 - prod_k |lam_k|^2``.
    """
    r2 = _squared_moduli_in_disk(eigenvalues)
    suffix = np.ones(r2.size)
    if r2.size > 1:
        suffix[:-1] = np.cumprod(r2[::-1])[::-1][1:]
    return (1.0 - r2) * suffix


def predicted_w_moduli(eigenvalues) -> np.ndarray:
    """``|w_k|^2 = (1 - |lam_k|^2) prod_{l < k} |lam_l|^2``, mirror of the above."""
    r2 = _squared_moduli_in_disk(eigenvalues)
    prefix = np.ones(r2.size)
    if r2.size > 1:
        prefix[1:] = np.cumprod(r2)[:-1]
    return (1.0 - r2) * prefix
