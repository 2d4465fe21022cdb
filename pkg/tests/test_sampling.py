import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from qergodic.errors import DomainError
from qergodic.hilbert import build_projector_overlaps
from qergodic.sampling import (
    SeedSpec,
    complex_gaussians,
    conjugated_hamiltonian,
    decomposition_from_hamiltonian,
    haar_unitary,
    lemma1_statistics,
    uniform_decomposition,
    uniform_state,
)
from qergodic.spectra import generate_nonresonant_spectrum

P_FLOOR = 1e-3


class TestSeedSpec:
    def test_same_seed_same_draw(self):
        a = haar_unitary(6, SeedSpec(3, 2)).entries
        b = haar_unitary(6, SeedSpec(3, 2)).entries
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        s = SeedSpec(3)
        draws = [uniform_state(4, x).coeffs for x in (s, s.trial(1), s.spawn(1), SeedSpec(4))]
        for i in range(len(draws)):
            for j in range(i):
                assert not np.allclose(draws[i], draws[j])

    def test_spawn_composes(self):
        s = SeedSpec(9, 1)
        assert s.spawn(2).spawn(5) == s.spawn(2, 5)
        assert s.trial(3).stream_index == 4

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            SeedSpec(-1)
        with pytest.raises(DomainError):
            SeedSpec(0, -2)

    def test_trial_order_does_not_matter(self):
        s = SeedSpec(11)
        forward = [uniform_state(5, s.trial(k)).coeffs for k in range(6)]
        backward = [uniform_state(5, s.trial(k)).coeffs for k in reversed(range(6))][::-1]
        assert all(np.array_equal(a, b) for a, b in zip(forward, backward))


def test_gaussian_moments():
    z = complex_gaussians(SeedSpec(1).generator(), (200_000,))
    assert abs(z.real.mean()) < 0.01 and abs(z.imag.mean()) < 0.01
    assert z.real.var() == pytest.approx(1, abs=0.02)
    assert abs(np.mean(z.real * z.imag)) < 0.01
    assert stats.kstest(z.real, "norm").pvalue > P_FLOOR


class TestHaar:
    @given(st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
    def test_unitary(self, D, seed):
        U = haar_unitary(D, SeedSpec(seed)).entries
        assert np.max(np.abs(U.conj().T @ U - np.eye(D))) < 1e-10

    def test_rejects_zero_dimension(self):
        with pytest.raises(DomainError):
            haar_unitary(0, SeedSpec())

    @pytest.mark.parametrize("D", [2, 5, 12])
    def test_entry_modulus_is_beta(self, D):
        # |U_ij|^2 of a Haar unitary is Beta(1, D - 1)
        x = np.array([abs(haar_unitary(D, SeedSpec(7, k)).entries[0, 1]) ** 2 for k in range(3000)])
        assert stats.kstest(x, stats.beta(1, D - 1).cdf).pvalue > P_FLOOR

    def test_trace_second_moment(self):
        # E|tr U|^2 = 1 for every D
        x = np.array([abs(np.trace(haar_unitary(8, SeedSpec(2, k)).entries)) ** 2 for k in range(4000)])
        assert x.mean() == pytest.approx(1.0, abs=4 * x.std() / np.sqrt(x.size))

    def test_eigenphases_uniform(self):
        ph = np.concatenate([np.angle(np.linalg.eigvals(haar_unitary(6, SeedSpec(5, k)).entries))
                             for k in range(800)])
        assert stats.kstest(ph, stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue > P_FLOOR

    def test_left_invariance(self):
        # V U has the same law as U; compare a phase-sensitive statistic
        V = haar_unitary(4, SeedSpec(999)).entries
        a = [haar_unitary(4, SeedSpec(1, k)).entries for k in range(2000)]
        b = [V @ haar_unitary(4, SeedSpec(2, k)).entries for k in range(2000)]
        stat = lambda U: np.real(U[0, 0] + U[1, 1])
        assert stats.ks_2samp([stat(u) for u in a], [stat(u) for u in b]).pvalue > P_FLOOR

    def test_matches_reference_sampler(self):
        ref = stats.unitary_group.rvs(5, size=2000, random_state=np.random.default_rng(0))
        ours = [haar_unitary(5, SeedSpec(4, k)).entries for k in range(2000)]
        stat = lambda U: np.real(np.trace(U))
        assert stats.ks_2samp([stat(u) for u in ours], [stat(u) for u in ref]).pvalue > P_FLOOR


class TestUniformState:
    def test_population_is_beta(self):
        D = 7
        x = np.array([uniform_state(D, SeedSpec(3, k)).population[2] for k in range(4000)])
        assert stats.kstest(x, stats.beta(1, D - 1).cdf).pvalue > P_FLOOR

    @given(st.integers(1, 64), st.integers(0, 2 ** 32 - 1))
    def test_normalized(self, D, seed):
        assert np.sum(uniform_state(D, SeedSpec(seed)).population) == pytest.approx(1, abs=1e-12)


class TestDecompositions:
    def test_dims_checked(self):
        with pytest.raises(DomainError):
            uniform_decomposition([2, 2], SeedSpec(), D=5)
        with pytest.raises(DomainError):
            uniform_decomposition([2, 0], SeedSpec())

    def test_block_occupation_is_beta(self):
        # <phi_1|P|phi_1> for a uniform d-dim subspace is Beta(d, D - d)
        D, d = 9, 3
        x = [build_projector_overlaps(uniform_decomposition([d, D - d], SeedSpec(8, k)), 0).diagonal[0]
             for k in range(3000)]
        assert stats.kstest(x, stats.beta(d, D - d).cdf).pvalue > P_FLOOR

    def test_hamiltonian_route_matches_decomposition_route(self):
        # random eigenbasis with fixed macro basis vs random macro basis with fixed eigenbasis
        D, d = 6, 2
        spec = generate_nonresonant_spectrum(D, SeedSpec(0))
        a = [build_projector_overlaps(
                decomposition_from_hamiltonian([d, D - d], conjugated_hamiltonian(spec, SeedSpec(1, k))),
                0).matrix for k in range(2500)]
        b = [build_projector_overlaps(uniform_decomposition([d, D - d], SeedSpec(2, k)), 0).matrix
             for k in range(2500)]
        for stat in (lambda m: m[0, 0].real, lambda m: abs(m[0, 1]) ** 2):
            assert stats.ks_2samp([stat(m) for m in a], [stat(m) for m in b]).pvalue > P_FLOOR

    def test_hamiltonian_alignment_is_conjugate(self):
        U = haar_unitary(4, SeedSpec(5))
        dec = decomposition_from_hamiltonian([1, 3], U)
        # P_1 = |e_0><e_0| in the macro basis, viewed in the eigenbasis: <phi_a|e_0><e_0|phi_b>
        expected = np.outer(U.entries[0].conj(), U.entries[0])
        assert np.allclose(build_projector_overlaps(dec, 0).matrix, expected)


class TestSubspaceOccupationMoments:
    def test_two_level(self):
        mean, var, cheb = lemma1_statistics(1, 2, 2.0)
        assert (mean, var, cheb) == pytest.approx((0.5, 1 / 12, 0.75))

    def test_full_space_has_no_variance(self):
        assert lemma1_statistics(4, 4, 0.1)[1] == 0.0

    @pytest.mark.parametrize("d,D", [(1, 3), (2, 5)])
    def test_matches_beta_moments(self, d, D):
        b = stats.beta(d, D - d)
        mean, var, _ = lemma1_statistics(d, D, 1.0)
        assert mean == pytest.approx(b.mean()) and var == pytest.approx(b.var())

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma1_statistics(0, 3, 0.1)
        with pytest.raises(DomainError):
            lemma1_statistics(1, 3, 0.0)
