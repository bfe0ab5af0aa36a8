"""Eigenvector overlap statistics for truncated Haar-unitary matrices.

Two independent routes to the same quantities, built to validate each
other at desk scale:

* a numeric pipeline (Haar sampling, truncation, complex Schur form,
  bi-orthogonal eigenvectors, overlap products), and
* eigenvalue-only closed forms for rank-one truncations, together with the
  exact conditional expectation of diagonal overlaps and its bulk and edge
  limits.
"""

from .linalg import (
    DegenerateSpectrumError,
    EigenSystem,
    NonConvergenceError,
    SchurForm,
    biorthogonality_residual,
    hessenberg,
    min_eigengap,
    qr_decompose,
    schur_decompose,
    triangular_eigenvectors,
)
from .ensembles import (
    RngStream,
    TruncationSample,
    border_vector_v,
    border_vector_w,
    kostlan_radii,
    predicted_v_moduli,
    predicted_w_moduli,
    sample_haar_unitary,
    sample_tue,
)
from .overlaps import (
    LogPolar,
    OverlapCycle,
    PiProducts,
    diagonal_overlap_formula,
    diagonal_overlaps_numeric,
    eigvec_entry_formulas,
    offdiag_overlap_formula,
    pi_products,
    q_overlap_formula,
    q_overlap_numeric,
    scalar_product_formulas,
)
from .potentials import (
    ContinuantState,
    DivergenceError,
    Potential,
    SignChangeError,
    big_g_v,
    bulk_limit,
    conditional_normalizer,
    conditional_product_expectation,
    continuant_solve,
    e_v_partial,
    edge_limit,
    expected_diag_overlap_tue1,
    gamma_v,
    gaussian_potential,
    moment_determinant_oracle,
    moment_matrix,
    potential_from_weight,
    tue1_potential,
)
from .harness import (
    ConfigError,
    ConjectureReport,
    ExperimentConfig,
    ExpectationScan,
    Figure1Data,
    KostlanReport,
    KSResult,
    VerificationReport,
    conjecture_test,
    expectation_scan,
    figure1_data,
    kostlan_check,
    ks_two_sample,
    sample_spectra,
    verify_overlaps,
)

__version__ = "0.1.0"
