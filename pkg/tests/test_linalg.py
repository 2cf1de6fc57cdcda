import numpy as np
import pytest
from numpy.testing import assert_allclose

from entcon.errors import DimensionMismatch, NotHermitian, OutOfRange
from entcon.linalg import (
    TOLERANCES,
    add,
    adjoint,
    hermitian_eigenvalues,
    hermitian_eigh,
    is_hermitian,
    is_unitary,
    kron,
    matmul,
    partial_trace,
    partial_transpose,
    permute_qubits,
    scale,
    trace,
    trace_norm_hermitian,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def random_matrix(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    a = random_matrix(dim, seed)
    return (a + a.conj().T) / 2.0


class TestHermitianEigenvalues:
    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_identity_and_pauli_x_should_have_known_spectra(self, method):
        assert_allclose(hermitian_eigenvalues(np.eye(2), method).eigenvalues, [1, 1])
        assert_allclose(
            hermitian_eigenvalues(PAULI_X, method).eigenvalues, [-1, 1], atol=1e-12
        )

    def test_two_by_two_should_match_characteristic_roots(self):
        m = random_hermitian(2, 3)
        a, d = m[0, 0].real, m[1, 1].real
        b = abs(m[0, 1])
        half_gap = np.sqrt(((a - d) / 2.0) ** 2 + b ** 2)
        expected = [(a + d) / 2.0 - half_gap, (a + d) / 2.0 + half_gap]
        assert_allclose(hermitian_eigenvalues(m).eigenvalues, expected, atol=1e-12)

    @pytest.mark.parametrize("dim", [3, 8, 16, 32])
    def test_jacobi_should_agree_with_lapack(self, dim):
        m = random_hermitian(dim, dim)
        assert_allclose(
            hermitian_eigenvalues(m, "jacobi").eigenvalues,
            hermitian_eigenvalues(m, "lapack").eigenvalues,
            atol=1e-9,
        )

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_eigenvalues_should_sum_to_trace(self, method):
        m = random_hermitian(16, 1)
        spectrum = hermitian_eigenvalues(m, method)
        assert len(spectrum) == 16
        assert spectrum.eigenvalues.sum() == pytest.approx(trace(m).real, abs=1e-9 * 16)

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_eigh_residuals_should_be_small(self, method):
        m = random_hermitian(12, 5)
        spectrum, vectors = hermitian_eigh(m, method)
        for value, v in zip(spectrum.eigenvalues, vectors.T):
            assert np.linalg.norm(m @ v - value * v) <= 1e-8

    def test_non_hermitian_input_should_raise(self):
        with pytest.raises(NotHermitian):
            hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_unknown_method_should_raise(self):
        with pytest.raises(OutOfRange):
            hermitian_eigenvalues(np.eye(2), method="qr")

    def test_non_square_input_should_raise(self):
        with pytest.raises(DimensionMismatch):
            hermitian_eigenvalues(np.zeros((2, 3)))


class TestTraceNorm:
    def test_known_values(self):
        assert trace_norm_hermitian(np.diag([1.0, -1.0])) == pytest.approx(2.0)
        assert trace_norm_hermitian(np.diag([0.5, 0.5])) == pytest.approx(1.0)
        bell = np.outer(BELL, BELL)
        assert trace_norm_hermitian(partial_transpose(bell, 2, 2)) == pytest.approx(2.0)

    def test_triangle_inequality_should_hold(self):
        for seed in range(20):
            a, b = random_hermitian(6, seed), random_hermitian(6, seed + 100)
            assert trace_norm_hermitian(a + b) <= (
                trace_norm_hermitian(a) + trace_norm_hermitian(b) + 1e-9
            )


class TestTensorOperations:
    def test_kron_should_follow_row_major_index_convention(self):
        a = np.arange(4).reshape(2, 2).astype(complex)
        b = np.arange(9).reshape(3, 3).astype(complex) + 1j
        k = kron(a, b)
        for i, j, r, s in np.ndindex(2, 2, 3, 3):
            assert k[i * 3 + r, j * 3 + s] == a[i, j] * b[r, s]

    def test_partial_transpose_should_swap_second_factor_indices(self):
        m = random_hermitian(6, 9)
        pt = partial_transpose(m, 2, 3)
        for i, j, k, l in np.ndindex(2, 2, 3, 3):
            assert pt[i * 3 + k, j * 3 + l] == m[i * 3 + l, j * 3 + k]

    def test_partial_transpose_should_be_an_involution_keeping_trace(self):
        m = random_hermitian(8, 2)
        pt = partial_transpose(m, 2, 4)
        assert_allclose(partial_transpose(pt, 2, 4), m)
        assert trace(pt) == pytest.approx(trace(m))
        assert is_hermitian(pt)

    def test_partial_transpose_with_wrong_dimensions_should_raise(self):
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(6), 2, 2)

    def test_partial_trace_of_product_should_recover_factor(self):
        a, b = random_hermitian(2, 1), random_hermitian(4, 2)
        assert_allclose(partial_trace(kron(a, b), 2, 4), a * trace(b), atol=1e-12)
        assert_allclose(
            partial_trace(kron(a, b), 4, 2, traced_last=False), b * trace(a), atol=1e-12
        )

    def test_partial_trace_with_wrong_dimensions_should_raise(self):
        with pytest.raises(DimensionMismatch):
            partial_trace(np.eye(4), 3, 2)

    def test_permute_qubits_should_reorder_product_factors(self):
        a, b, c = (random_hermitian(2, s) for s in range(3))
        m = kron(kron(a, b), c)
        assert_allclose(permute_qubits(m, (2, 0, 1)), kron(kron(c, a), b), atol=1e-12)

    def test_permute_qubits_should_reject_non_permutations(self):
        with pytest.raises(OutOfRange):
            permute_qubits(np.eye(4), (0, 0))


class TestMatrixArithmetic:
    def test_adjoint_should_be_an_involution(self):
        a = random_matrix(3, 40)
        assert_allclose(adjoint(adjoint(a)), a)
        assert_allclose(adjoint(a), a.conj().T)

    def test_trace_of_identity(self):
        assert trace(np.eye(4)) == 4.0

    def test_matmul_should_match_explicit_sums(self):
        a, b = random_matrix(3, 41), random_matrix(3, 42)
        expected = np.zeros((3, 3), dtype=complex)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    expected[i, j] += a[i, k] * b[k, j]
        assert_allclose(matmul(a, b), expected, atol=1e-12)

    def test_gram_matrix_should_have_non_negative_real_trace(self):
        for seed in range(20):
            a = random_matrix(4, seed)
            t = trace(matmul(a, adjoint(a)))
            assert t.real >= 0.0
            assert abs(t.imag) <= 1e-12

    def test_add_and_scale(self):
        a = random_matrix(2, 43)
        assert_allclose(add(a, scale(a, -1.0)), np.zeros((2, 2)))
        assert_allclose(scale(a, 2j), 2j * a)

    def test_mismatched_shapes_should_raise(self):
        with pytest.raises(DimensionMismatch):
            matmul(np.eye(2), np.eye(3))
        with pytest.raises(DimensionMismatch):
            add(np.eye(4), np.eye(2))
        with pytest.raises(DimensionMismatch):
            adjoint(np.ones((2, 3)))


class TestPredicates:
    def test_is_unitary(self):
        assert is_unitary(PAULI_X)
        assert not is_unitary(np.diag([1.0, 0.5]))


class TestTolerances:
    def test_package_should_expose_shared_tolerances(self):
        import entcon

        assert entcon.TOLERANCES is TOLERANCES
        assert (TOLERANCES.tol_herm, TOLERANCES.tol_psd, TOLERANCES.tol_norm) == (
            1e-10,
            1e-9,
            1e-12,
        )
