"""Monte Carlo experiment drivers.

Every experiment is a deterministic function of ``(seed, config)``: trial
``t`` always draws from stream ``(seed, t)``, and experiments that need an
independent second sample (synthetic products, reference beta radii) use
streams ``(seed, trials + t)``.  Aggregation walks trials in index order
with a deterministic tie-break, so a run split across worker processes is
bit-identical to the single-worker run.

Degenerate samples (minimal eigenvalue gap at or below ``gap_tol``) are
discarded and counted, never clamped; Schur non-convergence is counted
separately.  ``samples_used + samples_discarded_degenerate +
solver_failures == trials`` always holds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .ensembles import RngStream, kostlan_radii, sample_haar_unitary, sample_tue
from .linalg import (
    NonConvergenceError,
    min_eigengap,
    schur_decompose,
    triangular_eigenvectors,
)
from .overlaps import (
    OverlapCycle,
    diagonal_overlap_formula,
    diagonal_overlaps_numeric,
    q_overlap_formula,
    q_overlap_numeric,
)
from .potentials import bulk_limit, edge_limit, expected_diag_overlap_tue1

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "VerificationReport",
    "KSResult",
    "ConjectureReport",
    "KostlanReport",
    "ExpectationScan",
    "Figure1Data",
    "ks_two_sample",
    "verify_overlaps",
    "expectation_scan",
    "conjecture_test",
    "kostlan_check",
    "figure1_data",
    "sample_spectra",
]

KS_ASYMPTOTIC_1PCT = 1.6276
VERIFY_REL_TOL = 1e-6
RANDOM_CYCLES_PER_TRIAL = 20
SPARSE_BIN_COUNT = 50
EQUALITY_TOL = 1e-10


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    n: int
    m: int = 1
    trials: int = 100
    seed: int = 0
    q_max: int = 3
    gap_tol: float = 1e-8
    bins: int = 40
    output_path: str | None = None
    format: str = "csv"
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.q_max < 1:
            raise ConfigError("q_max must be >= 1")
        if self.gap_tol <= 0:
            raise ConfigError("gap_tol must be positive")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self


@dataclass
class KSResult:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic 1% bar."""

    statistic: float
    n1: int
    n2: int
    critical_1pct: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_1pct


@dataclass
class VerificationReport:
    samples_used: int
    samples_discarded_degenerate: int
    solver_failures: int
    comparisons: int
    max_rel_error: float
    mean_rel_error: float
    worst_trial: int
    worst_cycle: tuple
    worst_numeric: complex
    worst_formula: complex


@dataclass
class ExpectationScan:
    n: int
    bins: int
    rows: list
    samples_used: int
    samples_discarded_degenerate: int
    solver_failures: int


@dataclass
class ConjectureReport:
    factor_mode: str
    ks: KSResult
    numeric_used: int
    numeric_discarded: int
    numeric_solver_failures: int
    synthetic_used: int
    synthetic_discarded: int
    synthetic_solver_failures: int
    max_equality_dev: float | None = None


@dataclass
class KostlanReport:
    n: int
    m: int
    per_order: list
    samples_used: int
    solver_failures: int
    reference_size: int


@dataclass
class Figure1Data:
    cue: np.ndarray
    tue: np.ndarray
    circle_radius: float


def ks_two_sample(a, b) -> KSResult:
    """``sup |F_a - F_b|`` over the pooled sample, with the 1% critical value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n1
    cdf_b = np.searchsorted(b, pooled, side="right") / n2
    stat = float(np.abs(cdf_a - cdf_b).max())
    crit = KS_ASYMPTOTIC_1PCT * math.sqrt((n1 + n2) / (n1 * n2))
    return KSResult(statistic=stat, n1=n1, n2=n2, critical_1pct=crit)


_BLAS_LIMITER = None


def _single_threaded_blas():
    """Pin BLAS to one thread: trials are tiny matrices run in parallel anyway."""
    global _BLAS_LIMITER
    _BLAS_LIMITER = threadpool_limits(limits=1)


def _run_trials(fn, tasks, workers: int):
    """Map trials to results preserving order; workers only change scheduling."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        with threadpool_limits(limits=1):
            return [fn(t) for t in tasks]
    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=_single_threaded_blas) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))


# ---------------------------------------------------------------------------
# dual-pipeline verification
# ---------------------------------------------------------------------------

def _verify_trial(task):
    n, gap_tol, q_max, seed, trial, n_cycles = task
    gen = RngStream(seed, trial).generator()
    ts = sample_tue(n, 1, gen)
    try:
        sf = schur_decompose(ts.g)
    except NonConvergenceError:
        return ("solver", None)
    lam = sf.eigenvalues
    if min_eigengap(lam) <= gap_tol:
        return ("degenerate", None)
    es = triangular_eigenvectors(sf.t, gap_tol)
    cycles = [OverlapCycle((i, i)) for i in range(n)]
    for _ in range(n_cycles):
        q = int(gen.integers(1, q_max + 1))
        idx = tuple(int(v) for v in gen.integers(0, n, size=2 * q))
        cycles.append(OverlapCycle(idx))
    out = []
    for cyc in cycles:
        num = q_overlap_numeric(es, cyc)
        form = q_overlap_formula(lam, cyc, gap_tol=gap_tol)
        scale = max(abs(num), abs(form))
        rel = abs(num - form) / scale if scale > 0.0 else 0.0
        out.append((rel, cyc.indices, num, form))
    return ("ok", out)


def verify_overlaps(cfg: ExperimentConfig) -> VerificationReport:
    """Compare the numeric and closed-form overlap engines trial by trial.

    Each trial samples a rank-one truncation, Schur-decomposes it, builds
    the bi-orthogonal eigenvector family, and evaluates all diagonal cycles
    plus ``RANDOM_CYCLES_PER_TRIAL`` random cycles of length up to
    ``cfg.q_max`` through both engines.
    """
    cfg.validate()
    if cfg.m != 1:
        raise ConfigError("overlap verification requires m = 1")
    tasks = [
        (cfg.n, cfg.gap_tol, cfg.q_max, cfg.seed, t, RANDOM_CYCLES_PER_TRIAL)
        for t in range(cfg.trials)
    ]
    results = _run_trials(_verify_trial, tasks, cfg.workers)
    used = degenerate = failures = comparisons = 0
    max_rel = 0.0
    sum_rel = 0.0
    worst = (-1, (), 0.0 + 0.0j, 0.0 + 0.0j)
    for trial, (status, payload) in enumerate(results):
        if status == "solver":
            failures += 1
            continue
        if status == "degenerate":
            degenerate += 1
            continue
        used += 1
        for rel, indices, num, form in payload:
            comparisons += 1
            sum_rel += rel
            if rel > max_rel:
                max_rel = rel
                worst = (trial, indices, num, form)
    return VerificationReport(
        samples_used=used,
        samples_discarded_degenerate=degenerate,
        solver_failures=failures,
        comparisons=comparisons,
        max_rel_error=max_rel,
        mean_rel_error=sum_rel / comparisons if comparisons else 0.0,
        worst_trial=worst[0],
        worst_cycle=worst[1],
        worst_numeric=worst[2],
        worst_formula=worst[3],
    )


# ---------------------------------------------------------------------------
# conditional-expectation scan
# ---------------------------------------------------------------------------

def _overlap_sample_trial(task):
    """One trial of the numeric pipeline: squared radii and diagonal overlaps."""
    n, m, gap_tol, seed, stream = task
    gen = RngStream(seed, stream).generator()
    ts = sample_tue(n, m, gen)
    try:
        sf = schur_decompose(ts.g)
    except NonConvergenceError:
        return ("solver", None, None)
    lam = sf.eigenvalues
    if min_eigengap(lam) <= gap_tol:
        return ("degenerate", None, None)
    es = triangular_eigenvectors(sf.t, gap_tol)
    return ("ok", np.abs(lam) ** 2, diagonal_overlaps_numeric(es))


def expectation_scan(cfg: ExperimentConfig) -> ExpectationScan:
    """Radially binned empirical mean of diagonal overlaps vs the exact curve.

    All eigenvalues of all retained samples contribute (the conditional law
    depends only on the radius, and eigenvalues are exchangeable).  Bins with
    fewer than ``SPARSE_BIN_COUNT`` points are flagged sparse.
    """
    cfg.validate()
    if cfg.m != 1:
        raise ConfigError("the exact expectation curve requires m = 1")
    tasks = [(cfg.n, cfg.m, cfg.gap_tol, cfg.seed, t) for t in range(cfg.trials)]
    results = _run_trials(_overlap_sample_trial, tasks, cfg.workers)
    counts = np.zeros(cfg.bins, dtype=int)
    sums = np.zeros(cfg.bins, dtype=float)
    used = degenerate = failures = 0
    for status, r2, oii in results:
        if status == "solver":
            failures += 1
            continue
        if status == "degenerate":
            degenerate += 1
            continue
        used += 1
        idx = np.minimum((r2 * cfg.bins).astype(int), cfg.bins - 1)
        np.add.at(counts, idx, 1)
        np.add.at(sums, idx, oii)
    rows = []
    for b in range(cfg.bins):
        center = (b + 0.5) / cfg.bins
        count = int(counts[b])
        expected = expected_diag_overlap_tue1(cfg.n, center)
        empirical = sums[b] / count if count else math.nan
        rows.append(
            {
                "bin_center": center,
                "count": count,
                "empirical_mean": empirical,
                "expected_mean": expected,
                "ratio": empirical / expected if count else math.nan,
                "bulk_approx": cfg.n * bulk_limit(center),
                "edge_approx": edge_limit(cfg.n * (1.0 - center)),
                "sparse": int(count < SPARSE_BIN_COUNT),
            }
        )
    return ExpectationScan(
        n=cfg.n,
        bins=cfg.bins,
        rows=rows,
        samples_used=used,
        samples_discarded_degenerate=degenerate,
        solver_failures=failures,
    )


# ---------------------------------------------------------------------------
# beta-decomposition conjecture
# ---------------------------------------------------------------------------

def _synthetic_product_trial(task):
    """Synthetic diagonal overlaps from an independent spectrum and beta draws."""
    n, m, gap_tol, seed, stream, factor_mode = task
    gen = RngStream(seed, stream).generator()
    ts = sample_tue(n, m, gen)
    try:
        sf = schur_decompose(ts.g)
    except NonConvergenceError:
        return ("solver", None, None)
    lam = sf.eigenvalues
    if min_eigengap(lam) <= gap_tol:
        return ("degenerate", None, None)
    vals = np.empty(n)
    max_dev = 0.0
    for i in range(n):
        others = np.delete(lam, i)
        if m == 1:
            y = np.ones(n - 1)
        else:
            y = gen.beta(1.0, float(m - 1), size=n - 1)
        gaps_sq = np.abs(lam[i] - others) ** 2
        if factor_mode == "edge_corrected":
            bracket = (1.0 - abs(lam[i]) ** 2) * (1.0 - np.abs(others) ** 2) / gaps_sq
            factors = 1.0 + bracket * y
            vals[i] = math.exp(float(np.sum(np.log(factors)))) if n > 1 else 1.0
            if m == 1:
                exact = diagonal_overlap_formula(lam, i, gap_tol=gap_tol)
                max_dev = max(max_dev, abs(vals[i] - exact) / exact)
        else:  # as_written
            bracket = ((lam[i] - lam[i].conjugate()) * (others - others.conj())).real / gaps_sq
            factors = 1.0 - bracket * y
            vals[i] = float(np.prod(factors))
    return ("ok", vals, max_dev)


def conjecture_test(cfg: ExperimentConfig, factor_mode: str = "edge_corrected") -> ConjectureReport:
    """Distributional test of the beta-product form of diagonal overlaps.

    Sample A is the numeric pipeline; sample B multiplies the conjectured
    per-eigenvalue factors over independently sampled spectra, with i.i.d.
    Beta(1, m-1) weights (a point mass at 1 when ``m = 1``).  Both factor
    conventions are supported: ``as_written`` uses
    ``1 - (lam_i - conj(lam_i))(lam_k - conj(lam_k)) / |lam_i - lam_k|^2 * Y``
    and is reported without any pass/fail claim; ``edge_corrected`` uses
    ``1 + (1 - |lam_i|^2)(1 - |lam_k|^2) / |lam_i - lam_k|^2 * Y``, which for
    ``m = 1`` reduces to the proven deterministic product and is verified
    against it per sample.
    """
    cfg.validate()
    if factor_mode not in ("as_written", "edge_corrected"):
        raise ConfigError(f"unknown factor mode {factor_mode!r}")
    numeric_tasks = [(cfg.n, cfg.m, cfg.gap_tol, cfg.seed, t) for t in range(cfg.trials)]
    synthetic_tasks = [
        (cfg.n, cfg.m, cfg.gap_tol, cfg.seed, cfg.trials + t, factor_mode)
        for t in range(cfg.trials)
    ]
    numeric_res = _run_trials(_overlap_sample_trial, numeric_tasks, cfg.workers)
    synthetic_res = _run_trials(_synthetic_product_trial, synthetic_tasks, cfg.workers)

    numeric_vals = []
    n_used = n_deg = n_fail = 0
    for status, _r2, oii in numeric_res:
        if status == "solver":
            n_fail += 1
        elif status == "degenerate":
            n_deg += 1
        else:
            n_used += 1
            numeric_vals.append(oii)
    synthetic_vals = []
    s_used = s_deg = s_fail = 0
    max_dev = 0.0
    for status, vals, dev in synthetic_res:
        if status == "solver":
            s_fail += 1
        elif status == "degenerate":
            s_deg += 1
        else:
            s_used += 1
            synthetic_vals.append(vals)
            max_dev = max(max_dev, dev)
    if not numeric_vals or not synthetic_vals:
        raise RuntimeError("all trials were discarded; nothing to compare")
    a = np.concatenate(numeric_vals)
    b = np.concatenate(synthetic_vals)
    ks = ks_two_sample(a, b)
    equality_dev = None
    if cfg.m == 1 and factor_mode == "edge_corrected":
        equality_dev = max_dev
        if max_dev > EQUALITY_TOL:
            raise RuntimeError(
                f"synthetic product deviates from the deterministic overlap "
                f"formula by {max_dev:.3e} (> {EQUALITY_TOL:g}); engine bug"
            )
    return ConjectureReport(
        factor_mode=factor_mode,
        ks=ks,
        numeric_used=n_used,
        numeric_discarded=n_deg,
        numeric_solver_failures=n_fail,
        synthetic_used=s_used,
        synthetic_discarded=s_deg,
        synthetic_solver_failures=s_fail,
        max_equality_dev=equality_dev,
    )


# ---------------------------------------------------------------------------
# beta radii consistency
# ---------------------------------------------------------------------------

def _spectrum_radii_trial(task):
    n, m, seed, stream = task
    gen = RngStream(seed, stream).generator()
    ts = sample_tue(n, m, gen)
    try:
        sf = schur_decompose(ts.g)
    except NonConvergenceError:
        return ("solver", None)
    return ("ok", np.sort(np.abs(sf.eigenvalues) ** 2))


def kostlan_check(cfg: ExperimentConfig) -> KostlanReport:
    """Order-statistic KS tests: sampled squared radii vs direct beta draws."""
    cfg.validate()
    tasks = [(cfg.n, cfg.m, cfg.seed, t) for t in range(cfg.trials)]
    results = _run_trials(_spectrum_radii_trial, tasks, cfg.workers)
    sampled = []
    failures = 0
    for status, radii in results:
        if status == "solver":
            failures += 1
        else:
            sampled.append(radii)
    if not sampled:
        raise RuntimeError("all trials failed in the Schur solver")
    sampled = np.vstack(sampled)
    reference = np.vstack(
        [
            np.sort(kostlan_radii(cfg.n, cfg.m, RngStream(cfg.seed, cfg.trials + t)))
            for t in range(cfg.trials)
        ]
    )
    per_order = [
        ks_two_sample(sampled[:, k], reference[:, k]) for k in range(cfg.n)
    ]
    return KostlanReport(
        n=cfg.n,
        m=cfg.m,
        per_order=per_order,
        samples_used=sampled.shape[0],
        solver_failures=failures,
        reference_size=reference.shape[0],
    )


# ---------------------------------------------------------------------------
# eigenvalue scatter export
# ---------------------------------------------------------------------------

def figure1_data(n: int, seed: int) -> Figure1Data:
    """One Haar unitary of size n+1 and its top-left n x n truncation.

    Emits the n+1 unimodular eigenvalues, the n truncation eigenvalues
    (strictly inside the disk), and the reference circle radius
    ``1 - 10/n`` marking the typical O(1/n) depth of the truncated
    spectrum.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    gen = RngStream(seed, 0).generator()
    u = sample_haar_unitary(n + 1, gen)
    cue = schur_decompose(u).eigenvalues
    tue = schur_decompose(u[:n, :n]).eigenvalues
    return Figure1Data(cue=cue, tue=tue, circle_radius=1.0 - 10.0 / n)


# ---------------------------------------------------------------------------
# plain spectrum export
# ---------------------------------------------------------------------------

def _sample_spectrum_trial(task):
    n, m, seed, stream = task
    gen = RngStream(seed, stream).generator()
    ts = sample_tue(n, m, gen)
    try:
        sf = schur_decompose(ts.g)
    except NonConvergenceError:
        return ("solver", None)
    return ("ok", sf.eigenvalues)


def sample_spectra(cfg: ExperimentConfig):
    """Eigenvalues of ``trials`` independent truncation samples.

    Returns ``(rows, solver_failures)`` where each row is
    ``(trial, index, eigenvalue)`` in deflation order.
    """
    cfg.validate()
    tasks = [(cfg.n, cfg.m, cfg.seed, t) for t in range(cfg.trials)]
    results = _run_trials(_sample_spectrum_trial, tasks, cfg.workers)
    rows = []
    failures = 0
    for trial, (status, lam) in enumerate(results):
        if status == "solver":
            failures += 1
            continue
        for k, z in enumerate(lam):
            rows.append((trial, k, complex(z)))
    return rows, failures
