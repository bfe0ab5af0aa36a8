"""Tests for QR, Schur, and triangular eigenvector extraction."""

import numpy as np
import pytest

from tue_overlaps.linalg import (
    DegenerateSpectrumError,
    NonConvergenceError,
    biorthogonality_residual,
    hessenberg,
    min_eigengap,
    qr_decompose,
    schur_decompose,
    triangular_eigenvectors,
)
from tue_overlaps.ensembles import RngStream, sample_tue


def random_complex(n, seed):
    gen = np.random.default_rng(seed)
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


def tue_matrix(n, seed, stream=0):
    return sample_tue(n, 1, RngStream(seed, stream)).g


class TestQR:
    def test_identity_is_exact_fixed_point(self):
        q, r = qr_decompose(np.eye(3, dtype=complex))
        assert np.array_equal(q, np.eye(3, dtype=complex))
        assert np.array_equal(r, np.eye(3, dtype=complex))

    def test_diagonal_input(self):
        q, r = qr_decompose(np.diag([2.0, 3.0]).astype(complex))
        # q is a diagonal of unit-modulus phases
        assert np.abs(np.abs(np.diagonal(q)) - 1.0).max() < 1e-14
        assert np.abs(q - np.diag(np.diagonal(q))).max() < 1e-14
        assert np.abs(np.abs(np.diagonal(r)) - np.array([2.0, 3.0])).max() < 1e-14

    def test_reconstruction_random(self):
        a = random_complex(4, seed=11)
        q, r = qr_decompose(a)
        assert np.abs(q @ r - a).max() < 1e-12
        assert np.abs(q @ q.conj().T - np.eye(4)).max() < 1e-13
        assert np.abs(np.tril(r, -1)).max() == 0.0

    def test_r_diagonal_real_nonnegative(self):
        for seed in range(5):
            _, r = qr_decompose(random_complex(6, seed))
            d = np.diagonal(r)
            assert np.all(d.imag == 0.0)
            assert np.all(d.real >= 0.0)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            qr_decompose(np.ones((2, 3), dtype=complex))

    def test_rejects_non_finite(self):
        a = np.eye(2, dtype=complex)
        a[0, 1] = np.nan
        with pytest.raises(ValueError):
            qr_decompose(a)


class TestHessenberg:
    def test_form_and_similarity(self):
        a = random_complex(7, seed=3)
        h, q = hessenberg(a)
        assert np.abs(np.tril(h, -2)).max() == 0.0
        assert np.abs(q @ h @ q.conj().T - a).max() < 1e-12


class TestSchur:
    def test_triangular_input_passthrough(self):
        t_in = np.triu(random_complex(4, seed=5))
        sf = schur_decompose(t_in)
        assert np.array_equal(sf.q, np.eye(4, dtype=complex))
        assert np.array_equal(sf.t, t_in)
        assert np.array_equal(sf.eigenvalues, np.diagonal(t_in))

    def test_rotation_matrix_eigenvalues(self):
        # characteristic polynomial lambda^2 + 1 has roots +i, -i
        sf = schur_decompose(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex))
        got = sorted(sf.eigenvalues, key=lambda z: z.imag)
        assert abs(got[0] - (-1j)) < 1e-12
        assert abs(got[1] - 1j) < 1e-12

    def test_tue_sample_reconstruction(self):
        g = tue_matrix(5, seed=42)
        sf = schur_decompose(g)
        assert np.abs(sf.q @ sf.t @ sf.q.conj().T - g).max() < 1e-10

    def test_eigenvalue_multiset_against_lapack(self):
        # independent oracle: LAPACK's eigenvalue solver
        for n, seed in [(2, 0), (5, 1), (9, 2), (16, 3)]:
            a = random_complex(n, seed)
            sf = schur_decompose(a)
            mine = np.sort_complex(sf.eigenvalues)
            ref = np.sort_complex(np.linalg.eigvals(a))
            scale = np.abs(ref).max()
            assert np.abs(mine - ref).max() < 1e-10 * max(scale, 1.0)

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 16, 32, 64])
    def test_invariant_bounds(self, n):
        a = random_complex(n, seed=100 + n)
        sf = schur_decompose(a)
        assert np.abs(sf.q @ sf.q.conj().T - np.eye(n)).max() <= 1e-11
        assert np.abs(sf.q @ sf.t @ sf.q.conj().T - a).max() <= 1e-10 * np.abs(a).max() * n
        assert np.abs(np.tril(sf.t, -1)).max() == 0.0
        assert np.array_equal(sf.eigenvalues, np.diagonal(sf.t))

    def test_unitary_input(self):
        # spectra of unitary matrices sit on the unit circle
        from tue_overlaps.ensembles import sample_haar_unitary

        u = sample_haar_unitary(30, RngStream(9, 0))
        sf = schur_decompose(u)
        assert np.abs(np.abs(sf.eigenvalues) - 1.0).max() < 1e-12

    def test_non_convergence_reports_block(self):
        with pytest.raises(NonConvergenceError) as err:
            schur_decompose(random_complex(8, seed=0), max_sweeps=1)
        lo, hi = err.value.block
        assert 0 <= lo < hi <= 7

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            schur_decompose(random_complex(3, seed=1), tol=0.0)


class TestTriangularEigenvectors:
    def test_two_by_two_closed_form(self):
        lam1, lam2, c = 0.3 + 0.1j, -0.2 + 0.5j, 1.5 - 0.7j
        t = np.array([[lam1, c], [0.0, lam2]])
        es = triangular_eigenvectors(t)
        assert abs(es.left[0, 1] - c / (lam1 - lam2)) < 1e-14
        assert abs(es.right[0, 1] - c / (lam2 - lam1)) < 1e-14
        assert es.left[0, 0] == 1.0 and es.left[1, 1] == 1.0
        assert es.right[0, 0] == 1.0 and es.right[1, 1] == 1.0

    def test_diagonal_gives_standard_basis(self):
        t = np.diag([0.3, -0.5 + 0.1j, 0.7j])
        es = triangular_eigenvectors(t)
        assert np.array_equal(es.left, np.eye(3, dtype=complex))
        assert np.array_equal(es.right, np.eye(3, dtype=complex))

    def test_pipeline_biorthogonality(self):
        sf = schur_decompose(tue_matrix(6, seed=8))
        es = triangular_eigenvectors(sf.t)
        assert biorthogonality_residual(es) < 1e-10

    def test_eigen_residuals(self):
        for seed in range(6):
            sf = schur_decompose(tue_matrix(10, seed=200 + seed))
            if min_eigengap(sf.eigenvalues) <= 1e-4:
                continue
            es = triangular_eigenvectors(sf.t)
            lam = es.eigenvalues
            left_res = np.abs(es.left @ sf.t - lam[:, None] * es.left).max()
            right_res = np.abs(sf.t @ es.right - lam[None, :] * es.right).max()
            assert left_res <= 1e-9
            assert right_res <= 1e-9

    def test_left_times_right_is_identity(self):
        for n, seed in [(4, 0), (9, 1), (16, 2)]:
            sf = schur_decompose(tue_matrix(n, seed=300 + seed))
            if min_eigengap(sf.eigenvalues) <= 1e-4:
                continue
            es = triangular_eigenvectors(sf.t)
            assert np.abs(es.left @ es.right - np.eye(n)).max() <= 1e-8

    def test_degenerate_spectrum_refused(self):
        t = np.diag([0.5, 0.5 + 1e-9]).astype(complex)
        with pytest.raises(DegenerateSpectrumError):
            triangular_eigenvectors(t, gap_tol=1e-8)

    def test_rejects_non_triangular(self):
        with pytest.raises(ValueError):
            triangular_eigenvectors(random_complex(3, seed=4))


class TestBiorthogonalityResidual:
    def test_standard_basis_is_zero(self):
        es = triangular_eigenvectors(np.diag([0.1, 0.4, -0.3]).astype(complex))
        assert biorthogonality_residual(es) == 0.0

    def test_broken_normalization_detected(self):
        es = triangular_eigenvectors(np.diag([0.1, 0.4, -0.3]).astype(complex))
        es.left[0] *= 2.0
        assert biorthogonality_residual(es) >= 1.0

    def test_pipeline_quality(self):
        sf = schur_decompose(tue_matrix(8, seed=77))
        es = triangular_eigenvectors(sf.t)
        assert biorthogonality_residual(es) < 1e-9
