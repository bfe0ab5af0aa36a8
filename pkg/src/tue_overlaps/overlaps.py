"""Eigenvector overlaps: numeric engine and eigenvalue-only closed forms.

For a rank-one truncation of a Haar unitary, every generalized overlap of
the bi-orthogonal eigenvector family is a deterministic function of the
eigenvalues alone.  This module implements both routes so they can check
each other:

* the numeric route, which takes an :class:`~tue_overlaps.linalg.EigenSystem`
  and multiplies out scalar products of actual eigenvectors, and
* the formula route, which evaluates the closed forms built from the
  cross-ratio products ``pi_j = prod_{l != j} (lam_j conj(lam_l) - 1) /
  (lam_j - lam_l)``.

Scalar-product conventions (matrix notation, rows are bras and columns are
kets): ``<L_i|L_j> = L_i L_j*``, ``<R_j|R_i> = R_j* R_i`` and
``<L_i|R_j> = L_i R_j = delta_ij``.  These are the pairings under which
the closed forms hold and both engines agree.

Index convention: everything in this package is 0-based.  Formulas are
conventionally written 1-based (eigenvalues ``lam_1 .. lam_N``); subtract
one from every index to obtain the arguments used here.   This is the
single place where that mapping is stated.

All products over eigenvalues are accumulated in log-polar form
(log-magnitude and phase) so that overlaps of order ``exp(c N)`` near the
unit circle neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_GAP_TOL, DegenerateSpectrumError, EigenSystem, min_eigengap

__all__ = [
    "LogPolar",
    "OverlapCycle",
    "PiProducts",
    "q_overlap_numeric",
    "q_overlap_formula",
    "pi_products",
    "diagonal_overlap_formula",
    "offdiag_overlap_formula",
    "eigvec_entry_formulas",
    "scalar_product_formulas",
    "diagonal_overlaps_numeric",
]

ZERO_COMPONENT_TOL = 1e-14


@dataclass(frozen=True)
class LogPolar:
    """A nonzero complex number stored as (log-magnitude, phase).

    Multiplication adds log-magnitudes and adds phases mod 2 pi, which keeps
    long products of eigenvalue cross-ratios exact in scale.
    """

    log_mag: float
    phase: float

    @classmethod
    def one(cls) -> "LogPolar":
        return cls(0.0, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogPolar":
        z = complex(z)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    def __mul__(self, other: "LogPolar") -> "LogPolar":
        return LogPolar(
            self.log_mag + other.log_mag,
            math.remainder(self.phase + other.phase, math.tau),
        )

    def __truediv__(self, other: "LogPolar") -> "LogPolar":
        return LogPolar(
            self.log_mag - other.log_mag,
            math.remainder(self.phase - other.phase, math.tau),
        )

    def conj(self) -> "LogPolar":
        return LogPolar(self.log_mag, -self.phase)

    def negated(self) -> "LogPolar":
        return LogPolar(self.log_mag, math.remainder(self.phase + math.pi, math.tau))

    def to_complex(self) -> complex:
        mag = math.exp(self.log_mag)
        return complex(mag * math.cos(self.phase), mag * math.sin(self.phase))


@dataclass(frozen=True)
class OverlapCycle:
    """Index cycle ``(i_1, j_1, ..., i_q, j_q)`` with wraparound ``i_{q+1} = i_1``."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(k) for k in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) < 2 or len(idx) % 2 != 0:
            raise ValueError("cycle needs an even number of indices, at least 2")

    @property
    def q(self) -> int:
        return len(self.indices) // 2

    def pairs(self) -> list[tuple[int, int, int]]:
        """Triples ``(i_l, j_l, i_{l+1})`` for l = 1..q with wraparound."""
        idx = self.indices
        q = self.q
        out = []
        for l in range(q):
            i_l = idx[2 * l]
            j_l = idx[2 * l + 1]
            i_next = idx[(2 * l + 2) % (2 * q)]
            out.append((i_l, j_l, i_next))
        return out

    def validate(self, n: int) -> None:
        for k in self.indices:
            if not 0 <= k < n:
                raise IndexError(f"cycle index {k} out of range for n={n}")


@dataclass(frozen=True)
class PiProducts:
    """``pi_plus``, ``pi_minus`` and their product for one eigenvalue index."""

    pi_plus: LogPolar
    pi_minus: LogPolar
    pi: LogPolar


def _spectrum(eigenvalues, gap_tol: float, require_disk: bool) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    if lam.size < 1:
        raise ValueError("need at least one eigenvalue")
    gap = min_eigengap(lam)
    if gap <= gap_tol:
        raise DegenerateSpectrumError(gap, gap_tol)
    if require_disk and np.any(np.abs(lam) >= 1.0):
        raise ValueError("all eigenvalue moduli must be < 1")
    return lam


def _logpolar_product(num: np.ndarray, den: np.ndarray) -> LogPolar:
    """Log-polar value of ``prod num_k / den_k`` for nonempty or empty arrays."""
    if num.size == 0:
        return LogPolar.one()
    log_mag = float(np.sum(np.log(np.abs(num))) - np.sum(np.log(np.abs(den))))
    phase = float(np.sum(np.angle(num)) - np.sum(np.angle(den)))
    return LogPolar(log_mag, math.remainder(phase, math.tau))


def pi_products(eigenvalues, j: int, gap_tol: float = DEFAULT_GAP_TOL) -> PiProducts:
    """Cross-ratio products ``pi_{j+}`` (over l > j), ``pi_{j-}`` (l < j), and ``pi_j``."""
    lam = _spectrum(eigenvalues, gap_tol, require_disk=False)
    n = lam.size
    if not 0 <= j < n:
        raise IndexError(f"index {j} out of range for n={n}")
    num = lam[j] * lam.conj() - 1.0
    den = lam[j] - lam
    plus = _logpolar_product(num[j + 1:], den[j + 1:])
    minus = _logpolar_product(num[:j], den[:j])
    return PiProducts(pi_plus=plus, pi_minus=minus, pi=plus * minus)


def diagonal_overlap_formula(
    eigenvalues, i: int, gap_tol: float = DEFAULT_GAP_TOL
) -> float:
    """Diagonal overlap ``O_ii = |pi_i|^2``, always >= 1 inside the unit disk.

    Equals ``prod_{k != i} (1 + (1 - |lam_k|^2)(1 - |lam_i|^2) / |lam_i - lam_k|^2)``.
    """
    _spectrum(eigenvalues, gap_tol, require_disk=True)
    p = pi_products(eigenvalues, i, gap_tol=gap_tol)
    return math.exp(2.0 * p.pi.log_mag)


def offdiag_overlap_formula(
    eigenvalues, i: int, j: int, gap_tol: float = DEFAULT_GAP_TOL
) -> complex:
    """Off-diagonal overlap ``O_ij`` for ``i != j`` from eigenvalues alone."""
    if i == j:
        raise ValueError("off-diagonal overlap needs i != j")
    lam = _spectrum(eigenvalues, gap_tol, require_disk=True)
    n = lam.size
    for k in (i, j):
        if not 0 <= k < n:
            raise IndexError(f"index {k} out of range for n={n}")
    r2 = np.abs(lam) ** 2
    pref = LogPolar.from_complex(
        (1.0 - r2[i]) * (1.0 - r2[j]) / abs(lam[i] - lam[j]) ** 2
    ).negated()
    mask = np.ones(n, dtype=bool)
    mask[[i, j]] = False
    lam_k = lam[mask]
    factors = 1.0 + (1.0 - np.abs(lam_k) ** 2) * (1.0 - lam[i] * lam[j].conjugate()) / (
        (lam[i] - lam_k) * (lam[j] - lam_k).conjugate()
    )
    if np.any(factors == 0.0):
        return 0.0 + 0.0j
    total = pref * _logpolar_product(factors, np.ones(factors.size))
    return total.to_complex()


def q_overlap_formula(
    eigenvalues, cycle: OverlapCycle, gap_tol: float = DEFAULT_GAP_TOL
) -> complex:
    """Closed-form generalized overlap for an index cycle.

    Product over the cycle of
    ``(1 - lam_i conj(lam_i)) (1 - lam_j conj(lam_j)) /
    ((1 - lam_i conj(lam_j)) (1 - lam_inext conj(lam_j))) * pi_i * conj(pi_j)``,
    accumulated in log-polar form.  For a diagonal pair ``(i, i)`` the phase
    cancels identically and the value is real.
    """
    lam = _spectrum(eigenvalues, gap_tol, require_disk=True)
    cycle.validate(lam.size)
    pi_cache: dict[int, PiProducts] = {}

    def pi_of(k: int) -> LogPolar:
        if k not in pi_cache:
            pi_cache[k] = pi_products(lam, k, gap_tol=gap_tol)
        return pi_cache[k].pi

    total = LogPolar.one()
    for i_l, j_l, i_next in cycle.pairs():
        num1 = LogPolar.from_complex(1.0 - lam[i_l] * lam[i_l].conjugate())
        num2 = LogPolar.from_complex(1.0 - lam[j_l] * lam[j_l].conjugate())
        den1 = LogPolar.from_complex(1.0 - lam[i_l] * lam[j_l].conjugate())
        den2 = LogPolar.from_complex(1.0 - lam[i_next] * lam[j_l].conjugate())
        total = total * (num1 * num2 / den1 / den2) * pi_of(i_l) * pi_of(j_l).conj()
    return total.to_complex()


def q_overlap_numeric(es: EigenSystem, cycle: OverlapCycle) -> complex:
    """Generalized overlap from an actual bi-orthogonal eigenvector family.

    ``prod_l  <L_{i_l}|L_{j_l}> <R_{j_l}|R_{i_{l+1}}>`` with the 2q scalar
    products accumulated in log-polar form.
    """
    n = es.eigenvalues.size
    cycle.validate(n)
    total = LogPolar.one()
    for i_l, j_l, i_next in cycle.pairs():
        ll = np.vdot(es.left[j_l], es.left[i_l])
        rr = np.vdot(es.right[:, j_l], es.right[:, i_next])
        if ll == 0 or rr == 0:
            return 0.0 + 0.0j
        total = total * LogPolar.from_complex(ll) * LogPolar.from_complex(rr)
    return total.to_complex()


def diagonal_overlaps_numeric(es: EigenSystem) -> np.ndarray:
    """All squared condition numbers ``O_ii = ||L_i||^2 ||R_i||^2`` at once."""
    ln = np.sum(np.abs(es.left) ** 2, axis=1)
    rn = np.sum(np.abs(es.right) ** 2, axis=0)
    return ln * rn


def _check_v_components(v: np.ndarray, indices) -> None:
    for k in indices:
        if abs(v[k]) <= ZERO_COMPONENT_TOL:
            raise ValueError(
                f"border-vector component v[{k}] vanishes (|v_k| <= {ZERO_COMPONENT_TOL:g}); "
                "the entry formulas divide by it"
            )


def eigvec_entry_formulas(
    eigenvalues, v, i: int, j: int, gap_tol: float = DEFAULT_GAP_TOL
) -> tuple[complex, complex]:
    """Closed-form eigenvector entries ``(l_ij, r_ji)`` for ``i < j``.

    ``v`` is the border vector of the Schur form (``t t* = I - v v*``); only
    the ratio ``v_i / v_j`` enters, so the result is invariant under a global
    phase rotation of ``v``.
    """
    if not i < j:
        raise ValueError("entry formulas require i < j")
    lam = _spectrum(eigenvalues, gap_tol, require_disk=False)
    n = lam.size
    if not 0 <= i < n or not 0 <= j < n:
        raise IndexError(f"indices ({i}, {j}) out of range for n={n}")
    v = np.asarray(v, dtype=complex).ravel()
    _check_v_components(v, (i, j))

    inner = lam[i + 1:j + 1]  # lam_l for l = i+1 .. j inclusive
    l_ij = (
        LogPolar.from_complex(v[i] / v[j])
        * LogPolar.from_complex((abs(lam[j]) ** 2 - 1.0) / (lam[j].conjugate() * lam[i] - 1.0))
        * _logpolar_product(
            inner.conj() * lam[i] - 1.0,
            inner.conj() * (lam[i] - inner),
        )
    )
    lead = lam[i:j]  # lam_l for l = i .. j-1 inclusive
    r_ji = (
        LogPolar.from_complex(v[j].conjugate() / v[i].conjugate())
        * LogPolar.from_complex((abs(lam[i]) ** 2 - 1.0) / (lam[i].conjugate() * lam[j] - 1.0))
        * _logpolar_product(inner, np.ones(inner.size))
        * _logpolar_product(lead.conj() * lam[j] - 1.0, lam[j] - lead)
    )
    return l_ij.to_complex(), r_ji.to_complex()


def scalar_product_formulas(
    eigenvalues, v, i: int, j: int, gap_tol: float = DEFAULT_GAP_TOL
) -> tuple[complex, complex]:
    """Closed forms of ``(<L_i|L_j>, <R_j|R_i>)``.

    Stated for ``i <= j``; the case ``i > j`` follows by sesquilinearity
    (both brackets conjugate under swapping the index pair).
    """
    if i > j:
        ll, rr = scalar_product_formulas(eigenvalues, v, j, i, gap_tol=gap_tol)
        return ll.conjugate(), rr.conjugate()
    lam = _spectrum(eigenvalues, gap_tol, require_disk=False)
    n = lam.size
    if not 0 <= i < n or not 0 <= j < n:
        raise IndexError(f"indices ({i}, {j}) out of range for n={n}")
    v = np.asarray(v, dtype=complex).ravel()
    _check_v_components(v, (i, j))
    inner = lam[i + 1:j + 1]  # lam_l for l = i+1 .. j inclusive
    if np.any(inner == 0):
        raise ValueError("zero eigenvalue inside the interval product")
    p_i = pi_products(lam, i, gap_tol=gap_tol)
    p_j = pi_products(lam, j, gap_tol=gap_tol)
    cross = LogPolar.from_complex(lam[i] * lam[j].conjugate() - 1.0)
    ll = (
        LogPolar.from_complex(v[i] / v[j])
        * LogPolar.from_complex(abs(lam[j]) ** 2 - 1.0)
        / cross
        / _logpolar_product(inner.conj(), np.ones(inner.size))
        * p_i.pi_plus
        * p_j.pi_plus.conj()
    )
    rr = (
        LogPolar.from_complex(v[j] / v[i])
        * LogPolar.from_complex(abs(lam[i]) ** 2 - 1.0)
        / cross
        * _logpolar_product(inner.conj(), np.ones(inner.size))
        * p_i.pi_minus
        * p_j.pi_minus.conj()
    )
    return ll.to_complex(), rr.to_complex()
