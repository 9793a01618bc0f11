import numpy as np
import pytest

from wpsim.radiation import (
    build_lattice,
    closed_form_amplitude,
    dipole_transform,
    gaussian_dipole,
    grid_points,
    mean_fields,
    mode_couplings,
    mode_solution,
    per_mode_rk_deviation,
    plane_wave_dipole,
    reconstruct_fields,
    time_average,
)

L = 2 * np.pi  # unit wavenumber spacing


def small_setup(k_max=2.0, grid_n=12, width=1.1, w0=-1.0, eps0=1.0):
    lattice = build_lattice(L, k_max)
    dipole = dipole_transform(gaussian_dipole(L, grid_n, width=width),
                              lattice, grid_n)
    return lattice, dipole


class TestBuildLattice:
    def test_minimal_shell_has_six_modes(self):
        lattice = build_lattice(L, 1.0 + 1e-9)
        assert lattice.n_modes == 6
        assert sorted(map(tuple, lattice.n_triples)) == sorted(
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])

    def test_pairs_present(self):
        lattice = build_lattice(L, 2.5)
        triples = set(map(tuple, lattice.n_triples))
        for t in triples:
            assert tuple(-np.array(t)) in triples

    def test_invariants_hold(self):
        # construction already runs the checks; make sure they see a big lattice
        lattice = build_lattice(L, 3.5)
        lattice.check_invariants()

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            build_lattice(L, 0.5)


class TestDipoleTransform:
    def test_zero_maps_to_zero(self):
        lattice = build_lattice(L, 1.5)
        dip = dipole_transform(np.zeros((8, 8, 8, 3)), lattice, 8)
        assert np.abs(dip.k_space).max() == 0.0

    def test_plane_wave_single_pair_support(self):
        lattice = build_lattice(L, 2.5)
        grid_n = 12
        dip = dipole_transform(plane_wave_dipole(lattice, grid_n, (1, 0, 0)),
                               lattice, grid_n)
        weights = np.linalg.norm(dip.k_space, axis=1)
        hot = weights > 1e-10 * weights.max()
        hot_triples = set(map(tuple, lattice.n_triples[hot]))
        assert hot_triples == {(1, 0, 0), (-1, 0, 0)}

    def test_longitudinal_projected_away(self):
        lattice = build_lattice(L, 1.5)
        grid_n = 10
        pts = grid_points(L, grid_n)
        k = lattice.k_vectors[np.where(
            (lattice.n_triples == [0, 0, 1]).all(axis=1))[0][0]]
        khat = k / np.linalg.norm(k)
        profile = (np.cos(pts @ k)[:, None] * khat).reshape(grid_n, grid_n, grid_n, 3)
        dip = dipole_transform(profile, lattice, grid_n)
        assert np.abs(dip.k_space).max() <= 1e-10

    def test_roundtrip_on_band_limited_transverse_input(self):
        lattice = build_lattice(L, 2.5)
        grid_n = 12
        grid = plane_wave_dipole(lattice, grid_n, (1, 1, 0), amplitude=0.7)
        dip = dipole_transform(grid, lattice, grid_n)
        assert np.abs(dip.real_space - grid.reshape(-1, 3)).max() <= 1e-12

    def test_grid_shape_mismatch(self):
        lattice = build_lattice(L, 1.5)
        with pytest.raises(ValueError, match="mismatch"):
            dipole_transform(np.zeros((8, 8, 8, 3)), lattice, 10)

    def test_unresolvable_modes_rejected(self):
        lattice = build_lattice(L, 4.0)
        with pytest.raises(ValueError, match="resolve"):
            dipole_transform(np.zeros((8, 8, 8, 3)), lattice, 8)


class TestModeSolution:
    def test_zero_witness_silent(self):
        sol = mode_solution(1.3, 0.2 + 0.1j, 0.0, np.linspace(0, 10, 50))
        assert np.abs(sol.closed).max() == 0.0

    def test_full_revolution_returns_to_zero(self):
        omega = 1.7
        sol = mode_solution(omega, 0.3, -1.0, np.array([0.0, 2 * np.pi / omega]))
        assert abs(sol.closed[-1]) <= 1e-12

    def test_long_time_average(self):
        omega, coupling, w0 = 1.3, 0.2 - 0.4j, -1.0
        n_periods = 400
        times = np.linspace(0, n_periods * 2 * np.pi / omega, 40001)
        sol = mode_solution(omega, coupling, w0, times, rk_check=False)
        avg = np.trapezoid(sol.closed, times) / times[-1]
        assert abs(avg - 1j / omega * coupling * w0) <= 1e-4

    def test_rk_agrees(self):
        sol = mode_solution(2.2, 0.3 + 0.2j, -1.0, np.linspace(0, 20, 100))
        assert sol.deviation <= 1e-8
        assert np.abs(sol.closed - sol.runge_kutta).max() <= 1e-8

    def test_amplitude_bound(self):
        omega, coupling, w0 = 0.9, 0.5 + 0.1j, -1.0
        times = np.linspace(0, 100, 4000)
        amp = closed_form_amplitude(np.array([omega]), np.array([coupling]),
                                    w0, times)[0]
        assert np.abs(amp).max() <= 2 * abs(coupling) * abs(w0) / omega + 1e-12

    def test_rejects_bad_frequency(self):
        with pytest.raises(ValueError):
            mode_solution(0.0, 0.1, 1.0, np.linspace(0, 1, 5))


class TestReconstructFields:
    def test_silent_modes(self):
        lattice = build_lattice(L, 1.5)
        pts = grid_points(L, 6)
        e, b = reconstruct_fields(lattice, np.zeros((lattice.n_modes, 2)), pts, 1.0)
        assert np.abs(e).max() == 0.0 and np.abs(b).max() == 0.0

    def test_single_pair_matches_hand_sum(self):
        lattice = build_lattice(L, 1.0 + 1e-9)
        eps0 = 1.0
        pts = grid_points(L, 5)
        amps = np.zeros((lattice.n_modes, 2), dtype=complex)
        m = int(np.where((lattice.n_triples == [0, 0, 1]).all(axis=1))[0][0])
        amps[m, 0] = 0.4 - 0.3j
        e, b = reconstruct_fields(lattice, amps, pts, eps0)
        # independent two-term evaluation of the mode expansion at each point
        k = lattice.k_vectors[m]
        omega = lattice.omegas[m]
        pol = lattice.polarizations[m, 0]
        pref = 1j * np.sqrt(omega / (2 * lattice.volume * eps0))
        term = pref * amps[m, 0] * np.exp(1j * pts @ k)
        e_ref = (term[:, None] * pol + (term[:, None] * pol).conj()).real
        b_pref = 1j * np.sqrt(1 / (2 * lattice.volume * eps0 * omega))
        b_term = b_pref * amps[m, 0] * np.exp(1j * pts @ k)
        b_ref = (b_term[:, None] * np.cross(k, pol)
                 + (b_term[:, None] * np.cross(k, pol)).conj()).real
        assert np.abs(e - e_ref).max() <= 1e-12
        assert np.abs(b - b_ref).max() <= 1e-12

    def test_shape_mismatch(self):
        lattice = build_lattice(L, 1.5)
        with pytest.raises(ValueError, match="shape"):
            reconstruct_fields(lattice, np.zeros((3, 2)), np.zeros((4, 3)), 1.0)


class TestTimeAveraging:
    def test_zero_witness_fields_vanish(self):
        lattice, dipole = small_setup()
        out = mean_fields(dipole, 0.0, 1.0, span=130.0, n_steps=512)
        assert np.abs(out["e_bar"]).max() == 0.0
        assert np.abs(out["b_bar"]).max() == 0.0

    def test_short_span_rejected(self):
        lattice, dipole = small_setup()
        with pytest.raises(ValueError, match="short"):
            mean_fields(dipole, -1.0, 1.0, span=10.0, n_steps=64)
        with pytest.raises(ValueError, match="short"):
            time_average(lambda t: (np.zeros(3),), 10.0, 64, slowest_omega=1.0)

    def test_mean_field_tracks_dipole(self):
        lattice, dipole = small_setup()
        w0, eps0 = -1.0, 1.3
        span = 40 * 2 * np.pi / lattice.omegas.min()
        out = mean_fields(dipole, w0, eps0, span=span, n_steps=2048)
        assert out["pointwise_residual"] <= 0.05
        assert out["b_over_e"] <= 0.02
        assert out["divergence_residual"] <= 1e-8

    def test_sign_covariance(self):
        lattice, dipole = small_setup(k_max=1.5, grid_n=8)
        span = 25 * 2 * np.pi
        plus = mean_fields(dipole, +1.0, 1.0, span=span, n_steps=512)
        minus = mean_fields(dipole, -1.0, 1.0, span=span, n_steps=512)
        assert np.abs(plus["e_bar"] + minus["e_bar"]).max() <= 1e-14

    def test_halving_step_converged(self):
        lattice, dipole = small_setup(k_max=1.5, grid_n=8)
        span = 30 * 2 * np.pi
        coarse = mean_fields(dipole, -1.0, 1.0, span=span, n_steps=6000)
        fine = mean_fields(dipole, -1.0, 1.0, span=span, n_steps=12000)
        scale = np.abs(fine["e_bar"]).max()
        assert np.abs(coarse["e_bar"] - fine["e_bar"]).max() / scale <= 1e-6

    def test_doubling_span_shrinks_magnetic_residual(self):
        # single-shell lattice (all modes at omega = 1) so the transient has
        # one frequency and the 1/T trend is not masked by beating between
        # incommensurate mode phases
        lattice = build_lattice(L, 1.0 + 1e-9)
        dipole = dipole_transform(gaussian_dipole(L, 10, width=1.1), lattice, 10)
        base_span = 21.5 * 2 * np.pi
        base = mean_fields(dipole, -1.0, 1.0, span=base_span, n_steps=4096)
        double = mean_fields(dipole, -1.0, 1.0, span=2 * base_span, n_steps=8192)
        assert base["b_over_e"] / double["b_over_e"] >= 1.8

    def test_generic_average_matches_fast_path(self):
        lattice, dipole = small_setup(k_max=1.5, grid_n=6)
        w0, eps0 = -1.0, 1.0
        span, n_steps = 140.0, 400
        couplings = mode_couplings(dipole, eps0)
        pts = grid_points(L, 6)

        def sampler(t):
            amps = closed_form_amplitude(lattice.omegas, couplings, w0,
                                         np.array([t]))[:, :, 0]
            return reconstruct_fields(lattice, amps, pts, eps0)

        e_slow, b_slow = time_average(sampler, span, n_steps,
                                      slowest_omega=lattice.omegas.min())
        fast = mean_fields(dipole, w0, eps0, span=span, n_steps=n_steps)
        assert np.abs(e_slow - fast["e_bar"]).max() <= 1e-12
        assert np.abs(b_slow - fast["b_bar"]).max() <= 1e-12


def test_per_mode_rk_sweep():
    lattice, dipole = small_setup(k_max=2.0, grid_n=10)
    dev = per_mode_rk_deviation(lattice, mode_couplings(dipole, 1.0), -1.0)
    assert dev <= 1e-8


def test_mode_coupling_formula():
    # hand evaluation on one mode: Omega = -sqrt(w/2V eps0) d* . e
    lattice, dipole = small_setup(k_max=1.5, grid_n=8)
    eps0 = 2.0
    got = mode_couplings(dipole, eps0)
    m = 3
    expected = -np.sqrt(lattice.omegas[m] / (2 * lattice.volume * eps0)) * (
        dipole.k_space[m].conj() @ lattice.polarizations[m, 1])
    assert abs(got[m, 1] - expected) <= 1e-14
