import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from entcon.errors import DimensionMismatch, InvalidState, NotHermitian, OutOfRange
from entcon.states import (
    DensityMatrix,
    PureState,
    RngStream,
    euclidean_distance,
    overlap_squared,
    projector,
    pure_trace_distance,
    sample_haar_pure,
    sample_haar_pure_batch,
    trace_distance,
)


class TestRngStream:
    def test_same_key_should_replay_identical_draws(self):
        a = RngStream(42, 7, (1, 2)).standard_normal(16)
        b = RngStream(42, 7, (1, 2)).standard_normal(16)
        assert a.tobytes() == b.tobytes()

    def test_different_keys_should_give_different_draws(self):
        base = RngStream(42, 7).standard_normal(8)
        assert not np.array_equal(base, RngStream(42, 8).standard_normal(8))
        assert not np.array_equal(base, RngStream(43, 7).standard_normal(8))
        assert not np.array_equal(base, RngStream(42, 7).child(0).standard_normal(8))

    def test_child_should_extend_the_path(self):
        child = RngStream(1, 2, (3,)).child(4)
        assert (child.master_seed, child.stream_index, child.path) == (1, 2, (3, 4))

    def test_seed_outside_64_bits_should_raise(self):
        with pytest.raises(OutOfRange):
            RngStream(2 ** 64, 0)
        with pytest.raises(OutOfRange):
            RngStream(-1, 0)


class TestPureState:
    def test_unnormalised_amplitudes_should_raise(self):
        with pytest.raises(InvalidState):
            PureState(np.array([1.0, 1.0]))

    def test_from_amplitudes_can_normalise(self):
        psi = PureState.from_amplitudes([1.0, 1.0j], normalize=True)
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0)

    def test_zero_vector_cannot_be_normalised(self):
        with pytest.raises(InvalidState):
            PureState.from_amplitudes([0.0, 0.0], normalize=True)

    def test_amplitudes_should_be_read_only(self):
        psi = PureState.basis(4, 2)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1.0

    def test_basis_index_outside_dimension_should_raise(self):
        with pytest.raises(OutOfRange):
            PureState.basis(2, 2)

    def test_global_phase_should_not_change_projector(self):
        psi = sample_haar_pure(4, RngStream(0, 0))
        assert_allclose(
            projector(psi.with_phase(1.3)).matrix, projector(psi).matrix, atol=1e-14
        )


class TestDensityMatrix:
    def test_non_unit_trace_should_raise(self):
        with pytest.raises(InvalidState):
            DensityMatrix(np.eye(2))

    def test_non_hermitian_matrix_should_raise(self):
        with pytest.raises(NotHermitian):
            DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_validate_should_reject_negative_eigenvalues(self):
        rho = DensityMatrix(np.diag([1.5, -0.5]))
        with pytest.raises(InvalidState):
            rho.validate()

    def test_maximally_mixed_purity(self):
        assert DensityMatrix.maximally_mixed(4).purity() == pytest.approx(0.25)
        assert projector(PureState.basis(4, 0)).purity() == pytest.approx(1.0)

    def test_clamped_spectrum_should_zero_rounding_only(self):
        rho = DensityMatrix(np.diag([1.0 + 1e-12, -1e-12]))
        assert rho.clamped_spectrum().min() == 0.0
        assert rho.spectrum().min() < 0.0


class TestDistances:
    def test_pure_state_closed_form_should_match_trace_norm(self):
        for i in range(20):
            stream = RngStream(5, i)
            psi, chi = sample_haar_pure(8, stream), sample_haar_pure(8, stream)
            assert trace_distance(projector(psi), projector(chi)) == pytest.approx(
                pure_trace_distance(psi, chi), abs=1e-10
            )

    def test_trace_distance_should_be_bounded_by_twice_euclidean(self):
        for i in range(20):
            stream = RngStream(6, i)
            psi, chi = sample_haar_pure(4, stream), sample_haar_pure(4, stream)
            assert trace_distance(projector(psi), projector(chi)) <= (
                2.0 * euclidean_distance(psi, chi) + 1e-12
            )

    def test_orthogonal_states_should_be_at_distance_two(self):
        d = trace_distance(
            projector(PureState.basis(2, 0)), projector(PureState.basis(2, 1))
        )
        assert d == pytest.approx(2.0)

    def test_dimension_mismatch_should_raise(self):
        with pytest.raises(DimensionMismatch):
            overlap_squared(PureState.basis(2, 0), PureState.basis(4, 0))


class TestHaarSampler:
    def test_samples_should_have_unit_norm(self):
        for i in range(10):
            psi = sample_haar_pure(16, RngStream(1, i))
            assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_sampler_should_be_deterministic_per_stream(self):
        a = sample_haar_pure(8, RngStream(9, 3)).amplitudes.tobytes()
        b = sample_haar_pure(8, RngStream(9, 3)).amplitudes.tobytes()
        assert a == b

    def test_dimension_below_two_should_raise(self):
        with pytest.raises(OutOfRange):
            sample_haar_pure(1, RngStream(0, 0))

    @pytest.mark.parametrize("dim", [4, 8])
    def test_overlap_should_follow_beta_law(self, dim):
        draws = 100_000
        amplitudes = sample_haar_pure_batch(dim, RngStream(11, dim), draws)
        overlaps = np.abs(amplitudes[:, 0]) ** 2
        result = stats.kstest(overlaps, lambda x: 1.0 - (1.0 - x) ** (dim - 1))
        assert result.statistic < stats.kstwo.ppf(0.99, draws)

    def test_mean_projector_should_be_maximally_mixed(self):
        amplitudes = sample_haar_pure_batch(4, RngStream(12, 0), 20_000)
        mean = np.einsum("ki,kj->ij", amplitudes, amplitudes.conj()) / len(amplitudes)
        assert_allclose(mean, np.eye(4) / 4.0, atol=0.02)

    def test_distribution_should_be_unitarily_invariant(self):
        dim, draws = 8, 20_000
        u = stats.unitary_group.rvs(dim, random_state=np.random.default_rng(5))
        rotated = sample_haar_pure_batch(dim, RngStream(13, 0), draws) @ u.T
        reference = sample_haar_pure_batch(dim, RngStream(13, 1), draws)
        result = stats.ks_2samp(
            np.abs(rotated[:, 0]) ** 2, np.abs(reference[:, 0]) ** 2
        )
        assert result.pvalue > 1e-3

    def test_evolve_should_keep_the_norm(self):
        u = stats.unitary_group.rvs(16, random_state=np.random.default_rng(6))
        psi = sample_haar_pure(16, RngStream(14, 0)).evolve(u)
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(DimensionMismatch):
            psi.evolve(np.eye(4))
