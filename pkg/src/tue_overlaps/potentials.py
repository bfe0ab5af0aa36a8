"""Radial-potential machinery for conditional overlap expectations.

A rotationally symmetric weight ``exp(-V(|z|^2))`` on the plane is described
by its generalized Gamma function ``Gamma_V(alpha) = int t^(alpha-1)
exp(-V(t)) dt``.  This module provides:

* the partial sums ``e_V^(m)(X) = sum_{k=0}^m X^k / Gamma_V(k+1)``,
* the nested tridiagonal (continuant) determinant recursion behind product
  statistics conditioned on one eigenvalue,
* a brute-force Andreief-determinant oracle for small sizes, built from
  monomial moments and expanded over permutations, and
* the exact conditional expectation of the diagonal overlap for rank-one
  truncations, with its bulk and edge limits.

The truncation weight is taken to be the flat weight on the unit disk,
``Gamma_V(alpha) = 1/alpha`` exactly; every quantity of interest is a ratio
in which a multiplicative constant in the weight cancels.  Area measure is
normalized by pi so radial monomial moments equal ``Gamma_V(k)`` with no
stray pi powers.

Determinant-scale quantities are carried as natural logarithms throughout
(``G_V(N)`` underflows double precision near N ~ 180 for the disk weight).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import permutations
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

__all__ = [
    "DivergenceError",
    "SignChangeError",
    "Potential",
    "ContinuantState",
    "tue1_potential",
    "gaussian_potential",
    "potential_from_weight",
    "gamma_v",
    "big_g_v",
    "e_v_partial",
    "conditional_normalizer",
    "continuant_solve",
    "conditional_product_expectation",
    "expected_diag_overlap_tue1",
    "bulk_limit",
    "edge_limit",
    "moment_matrix",
    "moment_determinant_oracle",
]

SERIES_SWITCH = 1e-4  # |1 - x| below this: evaluate cancellation-free series
EDGE_SERIES_SWITCH = 1e-3
ORACLE_MAX_N = 8


class DivergenceError(ValueError):
    """The defining moment integral diverges for the supplied potential."""


class SignChangeError(RuntimeError):
    """A continuant iterate became non-positive, so its log does not exist."""

    def __init__(self, k: int, value: float):
        self.k = k
        self.value = value
        super().__init__(f"continuant D_{k} = {value:g} is not positive")


@dataclass(frozen=True)
class Potential:
    """Radially symmetric weight described by its moment function.

    ``gamma_fn(alpha)`` must return ``int_0^inf t^(alpha-1) exp(-V(t)) dt``.
    ``gamma_is_reciprocal`` marks the flat disk weight, for which
    ``Gamma_V(alpha) = 1/alpha`` holds exactly and closed-form partial sums
    are available.
    """

    name: str
    gamma_fn: Callable[[float], float]
    support_radius: float | None = None
    gamma_is_reciprocal: bool = False


def tue1_potential() -> Potential:
    """Flat weight on the unit disk: the truncation ensemble's radial law."""
    return Potential(
        name="disk",
        gamma_fn=lambda alpha: 1.0 / alpha,
        support_radius=1.0,
        gamma_is_reciprocal=True,
    )


def gaussian_potential() -> Potential:
    """Weight ``exp(-t)`` on the half-line: classical Gamma moments."""
    return Potential(name="gaussian", gamma_fn=math.gamma, support_radius=None)


def potential_from_weight(
    name: str, v: Callable[[float], float], support_radius: float | None = None
) -> Potential:
    """Quadrature-backed potential from an explicit ``V``; raises on divergence."""

    def gamma_fn(alpha: float) -> float:
        upper = support_radius if support_radius is not None else np.inf
        with warnings.catch_warnings():
            # divergence surfaces as DivergenceError below, not as a warning
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(
                lambda t: t ** (alpha - 1.0) * math.exp(-v(t)), 0.0, upper, limit=200
            )
        if not math.isfinite(val) or (val != 0 and err > 1e-6 * abs(val) + 1e-12):
            raise DivergenceError(
                f"moment integral for alpha={alpha} of potential {name!r} "
                f"did not converge (value={val}, err={err})"
            )
        return val

    return Potential(name=name, gamma_fn=gamma_fn, support_radius=support_radius)


def gamma_v(p: Potential, alpha: float) -> float:
    """``Gamma_V(alpha)``; 1/alpha exactly for the disk weight."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    val = p.gamma_fn(alpha)
    if not math.isfinite(val) or val <= 0.0:
        raise DivergenceError(
            f"Gamma_V({alpha}) = {val} for potential {p.name!r} is not finite positive"
        )
    return val


def _gammas(p: Potential, count: int) -> np.ndarray:
    """``[Gamma_V(1), ..., Gamma_V(count)]``."""
    if p.gamma_is_reciprocal:
        return 1.0 / np.arange(1.0, count + 1.0)
    return np.array([gamma_v(p, float(k)) for k in range(1, count + 1)])


def big_g_v(p: Potential, k: int) -> float:
    """``log G_V(k) = sum_{j=1}^{k} log Gamma_V(j)``, with ``G_V(0) = 1``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 0.0
    return float(np.sum(np.log(_gammas(p, k))))


def e_v_partial(p: Potential, m: int, x: float) -> float:
    """Partial sum ``e_V^(m)(x) = sum_{k=0}^m x^k / Gamma_V(k+1)``.

    For the disk weight this is ``sum (k+1) x^k``; the closed form
    ``(1 - (m+2) x^(m+1) + (m+1) x^(m+2)) / (1-x)^2`` is used away from
    ``x = 1`` and the direct sum inside ``|1-x| <= 1e-4`` where the closed
    form cancels catastrophically.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if x < 0.0:
        raise ValueError("x must be >= 0")
    if p.gamma_is_reciprocal and abs(1.0 - x) > SERIES_SWITCH:
        return (1.0 - (m + 2) * x ** (m + 1) + (m + 1) * x ** (m + 2)) / (1.0 - x) ** 2
    powers = x ** np.arange(m + 1, dtype=float)
    if p.gamma_is_reciprocal:
        return float(np.sum(np.arange(1.0, m + 2.0) * powers))
    return float(np.sum(powers / _gammas(p, m + 1)))


def _log_e_v(p: Potential, m: int, x: float) -> float:
    """``log e_V^(m)(x)`` by log-sum-exp, safe for large m and x > 1."""
    if x < 0.0:
        raise ValueError("x must be >= 0")
    inv_log_gammas = -np.log(_gammas(p, m + 1))
    if x == 0.0:
        return float(inv_log_gammas[0])
    k = np.arange(m + 1, dtype=float)
    return float(logsumexp(k * math.log(x) + inv_log_gammas))


def conditional_normalizer(p: Potential, n: int, z1sq: float) -> float:
    """``log Z_N^(1) = log G_V(N) + log e_V^(N-1)(|z_1|^2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return big_g_v(p, n) + _log_e_v(p, n - 1, z1sq)


@dataclass
class ContinuantState:
    """Two-term window of the tridiagonal determinant recursion."""

    d_prev: float
    d_curr: float
    k: int


def continuant_solve(p: Potential, n: int, z1sq: float, a: float, b: float) -> float:
    """Log of the nested tridiagonal determinant ``D_{n-1}``.

    Iterates ``D_0 = 1``, ``D_1 = (a + z1sq) Gamma_V(1) + (b + 1) Gamma_V(2)``
    and ``D_k = ((a + z1sq) Gamma_V(k) + (b + 1) Gamma_V(k+1)) D_{k-1}
    - z1sq Gamma_V(k)^2 D_{k-2}``, rescaling the two-term window to dodge
    under/overflow.  With ``a = b = 0`` this is the conditional normalizer.

    Raises
    ------
    SignChangeError
        If some ``D_k`` is not positive (the log-scale representation fails);
        carries the offending ``k``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if z1sq < 0.0:
        raise ValueError("z1sq must be >= 0")
    if n == 1:
        return 0.0
    g = _gammas(p, n)  # Gamma_V(1..n)
    state = ContinuantState(d_prev=1.0, d_curr=(a + z1sq) * g[0] + (b + 1.0) * g[1], k=1)
    if state.d_curr <= 0.0:
        raise SignChangeError(1, state.d_curr)
    log_offset = 0.0
    for k in range(2, n):
        diag = (a + z1sq) * g[k - 1] + (b + 1.0) * g[k]
        nxt = diag * state.d_curr - z1sq * g[k - 1] ** 2 * state.d_prev
        if nxt <= 0.0:
            raise SignChangeError(k, nxt)
        state = ContinuantState(d_prev=state.d_curr, d_curr=nxt, k=k)
        if not 1e-120 < state.d_curr < 1e120:
            scale = state.d_curr
            state.d_prev /= scale
            state.d_curr = 1.0
            log_offset += math.log(scale)
    return log_offset + math.log(state.d_curr)


def conditional_product_expectation(
    p: Potential, n: int, z1sq: float, alpha: float
) -> float:
    """Conditional expectation of the product statistic with parameter ``alpha``.

    ``e_V^(N-1)(alpha^2 |z_1|^2) / (alpha^(N-1) e_V^(N-1)(|z_1|^2))``,
    evaluated in log scale; the implied tridiagonal parameters are
    ``a = (alpha - 1) z1sq`` and ``b = 1/alpha - 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha == 0.0:
        raise ValueError("alpha must be nonzero")
    sign = 1.0 if alpha > 0.0 or (n - 1) % 2 == 0 else -1.0
    log_val = (
        _log_e_v(p, n - 1, alpha * alpha * z1sq)
        - (n - 1) * math.log(abs(alpha))
        - _log_e_v(p, n - 1, z1sq)
    )
    return sign * math.exp(log_val)


def expected_diag_overlap_tue1(n: int, z1sq: float) -> float:
    """Exact conditional expectation of the diagonal overlap at radius^2 ``z1sq``.

    ``((N+1)(1-X) + X^(N+1) - 1) / (1 - X^(N+1) - (N+1)(1-X) X^N)`` with
    ``X = z1sq``.  Near ``X = 1`` both numerator and denominator vanish to
    second order, so inside ``|1-X| < 1e-4`` the equivalent cancellation-free
    polynomial ratio ``sum_j (N-j) X^j / sum_k (k+1) X^k`` is used instead.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= z1sq < 1.0:
        raise ValueError("z1sq must lie in [0, 1)")
    x = z1sq
    if abs(1.0 - x) > SERIES_SWITCH:
        num = (n + 1) * (1.0 - x) + x ** (n + 1) - 1.0
        den = 1.0 - x ** (n + 1) - (n + 1) * (1.0 - x) * x**n
        return num / den
    powers = x ** np.arange(n, dtype=float)
    num = float(np.sum((n - np.arange(n, dtype=float)) * powers))
    den = float(np.sum(np.arange(1.0, n + 1.0) * powers))
    return num / den


def bulk_limit(r1sq: float) -> float:
    """Large-size limit of (diagonal overlap)/N at fixed radius^2 inside the disk."""
    if not 0.0 <= r1sq < 1.0:
        raise ValueError("r1sq must lie in [0, 1)")
    return 1.0 - r1sq


def edge_limit(kappa: float) -> float:
    """Edge limit of the expected diagonal overlap at ``1 - |z|^2 ~ kappa / N``.

    ``(1 - (1-kappa) e^kappa) / (e^kappa - 1 - kappa)``; below
    ``kappa = 1e-3`` the Taylor form ``1 + kappa/3 + kappa^2/18`` keeps full
    precision.
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    if kappa < EDGE_SERIES_SWITCH:
        return 1.0 + kappa / 3.0 + kappa * kappa / 18.0
    ek = math.exp(kappa)
    return (1.0 - (1.0 - kappa) * ek) / (ek - 1.0 - kappa)


def _det_by_permutation_expansion(m: np.ndarray) -> complex:
    """Determinant by direct Leibniz expansion; independent of any recursion."""
    size = m.shape[0]
    total = 0.0 + 0.0j
    for perm in permutations(range(size)):
        # parity by counting inversions
        inversions = sum(
            1 for i in range(size) for j in range(i + 1, size) if perm[i] > perm[j]
        )
        term = (-1.0) ** inversions
        for i in range(size):
            term *= m[i, perm[i]]
        total += term
    return total


def _monomial_moment(p: Potential, pow_z: int, pow_zbar: int) -> float:
    """``int z^a conj(z)^b w(|z|^2) dm(z)`` with ``dm`` the area measure over pi.

    Angular orthogonality kills every unbalanced monomial; the balanced ones
    reduce to radial moments ``Gamma_V(a + 1)``.
    """
    if pow_z != pow_zbar:
        return 0.0
    return gamma_v(p, float(pow_z + 1))


def moment_matrix(p: Potential, n: int, z1: complex, a: float, b: float) -> np.ndarray:
    """The ``(n-1) x (n-1)`` conditioned moment matrix, entry by entry.

    ``M[i, j] = int z^i conj(z)^j (|z1 - z|^2 + a + b |z|^2) w(|z|^2) dm(z)``
    for ``i, j = 0 .. n-2``; entries with ``|i - j| >= 2`` vanish by angular
    orthogonality, which is what makes the determinant a continuant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    size = n - 1
    z1 = complex(z1)
    z1sq = abs(z1) ** 2
    m = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(size):
            val = (z1sq + a) * _monomial_moment(p, i, j)
            val += (1.0 + b) * _monomial_moment(p, i + 1, j + 1)
            val -= z1 * _monomial_moment(p, i, j + 1)
            val -= z1.conjugate() * _monomial_moment(p, i + 1, j)
            m[i, j] = val
    return m


def moment_determinant_oracle(
    p: Potential, n: int, z1: complex, a: float, b: float
) -> float:
    """Brute-force log-determinant of the conditioned moment matrix.

    Builds :func:`moment_matrix` from monomial moments and evaluates its
    determinant by direct permutation expansion, with no recursion involved.
    Cross-checks :func:`continuant_solve` at small sizes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle is limited to n <= {ORACLE_MAX_N}, got {n}")
    if n == 1:
        return 0.0
    det = _det_by_permutation_expansion(moment_matrix(p, n, z1, a, b))
    if abs(det.imag) > 1e-10 * max(abs(det.real), 1.0):
        raise ArithmeticError(f"moment determinant is not real: {det}")
    if det.real <= 0.0:
        raise SignChangeError(n - 1, det.real)
    return math.log(det.real)
