import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from wpsim.operators import (
    ID2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    commutator,
    destroy,
    evolve,
    expectation,
    hermitian_eigen,
    number_op,
    partial_trace,
    pure_state,
    tensor_product,
    thermal_state,
)


def random_density(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g + g.conj().T


class TestTensorProduct:
    def test_identity(self):
        assert np.array_equal(tensor_product(ID2, ID2), np.eye(4))

    def test_xx_antidiagonal(self):
        expected = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            expected[i, 3 - i] = 1.0
        assert np.array_equal(tensor_product(SIGMA_X, SIGMA_X), expected)

    def test_xx_minus_yy(self):
        # direct 4x4 Kronecker computation: only the |00><11| corners survive,
        # with weight 2
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 3] = expected[3, 0] = 2.0
        got = tensor_product(SIGMA_X, SIGMA_X) - tensor_product(SIGMA_Y, SIGMA_Y)
        assert np.allclose(got, expected, atol=1e-15)


class TestCommutator:
    def test_self_commutes(self):
        rng = np.random.default_rng(7)
        a = random_hermitian(rng, 5)
        assert np.abs(commutator(a, a)).max() == 0.0

    def test_pauli_algebra(self):
        assert np.allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            commutator(ID2, np.eye(3, dtype=complex))


class TestHermitianEigen:
    def test_sigma_z(self):
        sys = hermitian_eigen(SIGMA_Z)
        assert np.allclose(sys.values, [-1.0, 1.0])

    def test_xx_minus_yy_spectrum(self):
        w = tensor_product(SIGMA_X, SIGMA_X) - tensor_product(SIGMA_Y, SIGMA_Y)
        assert np.allclose(hermitian_eigen(w).values, [-2, 0, 0, 2], atol=1e-12)

    def test_identity(self):
        assert np.allclose(hermitian_eigen(np.eye(4)).values, 1.0)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(3)
        a = random_hermitian(rng, 8)
        sys = hermitian_eigen(a)
        assert np.abs(sys.reconstruct() - a).max() <= 1e-10
        assert np.abs(sys.vectors.conj().T @ sys.vectors - np.eye(8)).max() <= 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            hermitian_eigen(destroy(4))


class TestEvolve:
    def test_commuting_is_constant(self):
        rho = DensityMatrix(np.diag([0.75, 0.25]).astype(complex))
        out = evolve(SIGMA_Z, rho, 2.7)
        assert np.abs(out.matrix - rho.matrix).max() <= 1e-12

    def test_sigma_z_coherence_phase(self):
        # independent 2x2 oracle: rho(t) = U rho U^dag, U = diag(e^{-it}, e^{it})
        t = np.pi / 2
        u = np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)])
        plus = pure_state(np.array([1, 1]) / np.sqrt(2))
        expected = u @ plus.matrix @ u.conj().T
        out = evolve(SIGMA_Z, plus, t)
        assert np.abs(out.matrix - expected).max() <= 1e-12
        assert abs(out.matrix[0, 1] - (-0.5)) <= 1e-12  # e^{-2it} phase at t = pi/2

    def test_trace_preserved(self):
        rng = np.random.default_rng(11)
        rho = random_density(rng, 6)
        out = evolve(random_hermitian(rng, 6), rho, 1.3)
        assert abs(np.trace(out.matrix) - 1.0) <= 1e-12

    def test_semigroup(self):
        rng = np.random.default_rng(13)
        h = random_hermitian(rng, 5)
        rho = random_density(rng, 5)
        once = evolve(h, rho, 0.9 + 1.4)
        split = evolve(h, evolve(h, rho, 0.9), 1.4)
        assert np.abs(once.matrix - split.matrix).max() <= 1e-9

    def test_energy_conserved(self):
        rng = np.random.default_rng(17)
        h = random_hermitian(rng, 5)
        rho = random_density(rng, 5)
        e0 = expectation(h, rho)
        e1 = expectation(h, evolve(h, rho, 3.3))
        assert abs(e1 - e0) <= 1e-10

    def test_matches_pade_exponential(self):
        rng = np.random.default_rng(19)
        h = random_hermitian(rng, 6)
        rho = random_density(rng, 6)
        t = 0.8
        u = expm(-1j * h * t)
        expected = u @ rho.matrix @ u.conj().T
        out = evolve(h, rho, t)
        assert np.abs(out.matrix - expected).max() <= 1e-10

    def test_long_time_positivity(self):
        rng = np.random.default_rng(23)
        h = random_hermitian(rng, 4)
        h /= np.abs(np.linalg.eigvalsh(h)).max()
        rho = random_density(rng, 4)
        out = evolve(h, rho, 1e3)  # t * ||h|| = 1e3
        assert np.linalg.eigvalsh(out.matrix).min() >= -1e-10
        assert abs(np.trace(out.matrix) - 1) <= 1e-10


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(29)
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 3)
        joint = DensityMatrix(np.kron(rho_a.matrix, rho_b.matrix))
        red = partial_trace(joint, 2, 3, keep="a")
        assert np.abs(red.matrix - rho_a.matrix).max() <= 1e-12

    def test_bell_state_is_maximally_mixed(self):
        phi = pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))
        red = partial_trace(phi, 2, 2, keep="a")
        assert np.abs(red.matrix - np.eye(2) / 2).max() <= 1e-12

    def test_trace_one(self):
        rng = np.random.default_rng(31)
        rho = random_density(rng, 6)
        out = partial_trace(rho, 2, 3, keep="b")
        assert abs(np.trace(out.matrix) - 1.0) <= 1e-12

    def test_bad_factorization(self):
        rng = np.random.default_rng(37)
        with pytest.raises(ValueError, match="factor"):
            partial_trace(random_density(rng, 6), 4, 2)


class TestExpectation:
    def test_identity(self):
        rng = np.random.default_rng(41)
        rho = random_density(rng, 4)
        assert abs(expectation(np.eye(4), rho) - 1.0) <= 1e-12

    def test_eigenstate(self):
        ket0 = pure_state(np.array([1, 0]))
        assert abs(expectation(SIGMA_Z, ket0) - 1.0) <= 1e-14

    def test_bell_witness_value(self):
        w = tensor_product(SIGMA_X, SIGMA_X) - tensor_product(SIGMA_Y, SIGMA_Y)
        phi = pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))
        assert abs(expectation(w, phi) - 2.0) <= 1e-12

    def test_imaginary_residue_raises(self):
        bad = DensityMatrix(np.array([[0.5, 0.5], [-0.5, 0.5]], dtype=complex),
                            validate=False)
        with pytest.raises(ValueError, match="imaginary"):
            expectation(SIGMA_Y, bad)


class TestThermalState:
    def test_zero_temperature_limit(self):
        h = np.diag([0.0, 1.0, 2.0]).astype(complex)
        rho = thermal_state(h, beta=60.0)
        ground = np.diag([1.0, 0.0, 0.0])
        assert np.abs(rho.matrix - ground).max() <= 1e-12

    def test_bose_einstein_weights(self):
        dim, omega, beta = 9, 1.3, 0.7
        rho = thermal_state(omega * number_op(dim), beta)
        # independent diagonal formula
        w = np.exp(-beta * omega * np.arange(dim))
        w /= w.sum()
        assert np.abs(np.diag(rho.matrix).real - w).max() <= 1e-12
        assert np.abs(rho.matrix - np.diag(np.diag(rho.matrix))).max() <= 1e-12

    def test_ladder_means_vanish(self):
        dim = 12
        rho = thermal_state(number_op(dim), beta=0.9)
        a = destroy(dim)
        assert abs(np.trace(a @ rho.matrix)) <= 1e-12
        assert abs(np.trace(a.conj().T @ rho.matrix)) <= 1e-12

    def test_commutes_with_hamiltonian(self):
        rng = np.random.default_rng(43)
        h = random_hermitian(rng, 5)
        rho = thermal_state(h, beta=1.1)
        assert np.abs(commutator(h, rho.matrix)).max() <= 1e-10

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError, match="beta"):
            thermal_state(SIGMA_Z, beta=0.0)


class TestDensityMatrixInvariants:
    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(2, dtype=complex))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            DensityMatrix(np.diag([1.5, -0.5]).astype(complex))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 6),
       t=st.floats(-3, 3, allow_nan=False))
def test_evolution_preserves_state_properties(seed, dim, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim)
    rho = random_density(rng, dim)
    out = evolve(h, rho, t)
    assert abs(np.trace(out.matrix) - 1.0) <= 1e-10
    assert np.abs(out.matrix - out.matrix.conj().T).max() <= 1e-12
    assert np.linalg.eigvalsh(out.matrix).min() >= -1e-10
    assert abs(expectation(h, out) - expectation(h, rho)) <= 1e-9
