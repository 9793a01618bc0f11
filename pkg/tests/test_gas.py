import numpy as np
import pytest

from wpsim.gas import (
    GasConfig,
    analytic_momentum,
    analytic_sigma,
    boundary_projector,
    mc_ensemble,
    mc_sample,
    quantum_surrogate,
    surrogate_ground_state,
)
from wpsim.protocol import evolve_full
from wpsim.states import named_state
from wpsim.witness import WitnessBranches, build_w_pm, eigen_branches

PHI_PLUS = named_state("phi+")
KET_00 = named_state("00")


def single_branch(value: float) -> WitnessBranches:
    return WitnessBranches(values=np.array([value]),
                           bases=(np.eye(4, 1).astype(complex),),
                           probabilities=np.array([1.0]))


def make_config(branches, alpha=0.1, n=1000, mass=1.0, beta=1.0, t_max=10.0,
                n_steps=21):
    return GasConfig(n_particles=n, mass=mass, beta=beta, alpha=alpha,
                     branches=branches, times=np.linspace(0.0, t_max, n_steps))


class TestAnalytic:
    def test_zero_witness_no_drift(self):
        traj = analytic_momentum(0.1, 0.0, np.linspace(0, 10, 11))
        assert np.abs(traj.series["P"]).max() == 0.0

    def test_entangled_drifts_up(self):
        traj = analytic_momentum(0.1, -1.0, np.linspace(0, 10, 11))
        assert abs(traj.series["P"][-1] - 1.0) <= 1e-14

    def test_separable_drifts_down(self):
        traj = analytic_momentum(0.1, +1.0, np.linspace(0, 10, 11))
        assert abs(traj.series["P"][-1] - (-1.0)) <= 1e-14

    def test_sigma_initial_value(self):
        m, n, beta = 1.0, 1000, 1.0
        traj = analytic_sigma(0.1, 1.2, np.linspace(0, 10, 5), m, n, beta)
        assert abs(traj.series["sigma_P"][0] - np.sqrt(m / (n * beta))) <= 1e-14

    def test_sigma_constant_for_eigenstate(self):
        traj = analytic_sigma(0.1, 0.0, np.linspace(0, 10, 5), 1.0, 1000, 1.0)
        s = traj.series["sigma_P"]
        assert np.abs(s - s[0]).max() == 0.0

    def test_sigma_damps_with_n(self):
        small = analytic_sigma(0.1, 0.0, np.array([0.0]), 1.0, 100, 1.0)
        big = analytic_sigma(0.1, 0.0, np.array([0.0]), 1.0, 10000, 1.0)
        ratio = big.series["sigma_P"][0] / small.series["sigma_P"][0]
        assert abs(ratio - 0.1) <= 1e-12  # N^{-1/2} scaling


class TestMcSample:
    def test_deterministic(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), KET_00))
        a = mc_sample(cfg, seed=123, index=5)
        b = mc_sample(cfg, seed=123, index=5)
        assert np.array_equal(a, b)

    def test_different_index_differs(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), KET_00))
        assert not np.array_equal(mc_sample(cfg, 123, 0), mc_sample(cfg, 123, 1))

    def test_single_branch_slope(self):
        cfg = make_config(single_branch(-1.0), alpha=0.2)
        path = mc_sample(cfg, seed=7)
        slope = np.polyfit(cfg.times, path, 1)[0]
        assert abs(slope - 0.2) <= 1e-12  # thermal offset is constant in t

    def test_cold_limit_is_deterministic_drift(self):
        cfg = make_config(single_branch(1.0), alpha=0.3, beta=1e16)
        path = mc_sample(cfg, seed=11)
        assert np.abs(path - (-0.3) * cfg.times).max() <= 1e-6


class TestMcEnsemble:
    def test_matches_analytic_at_scale(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), PHI_PLUS))
        res = mc_ensemble(cfg, seed=42, samples=4000)
        assert res.max_abs_z <= 3.0
        rel = np.abs(res.std - res.analytic_std) / res.analytic_std
        assert rel.max() <= 0.05

    def test_symmetric_branches_no_drift(self):
        branches = WitnessBranches(
            values=np.array([-1.0, 1.0]),
            bases=(np.eye(4, 1).astype(complex),
                   np.eye(4, 2).astype(complex)[:, 1:]),
            probabilities=np.array([0.5, 0.5]))
        cfg = make_config(branches)
        res = mc_ensemble(cfg, seed=42, samples=4000)
        se = res.analytic_std / np.sqrt(res.sample_count)
        assert np.abs(res.mean).max() <= 3 * se.max()

    def test_two_samples_is_valid(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), PHI_PLUS))
        res = mc_ensemble(cfg, seed=1, samples=2)
        assert res.sample_count == 2
        assert np.isfinite(res.std).all()

    def test_rejects_single_sample(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), PHI_PLUS))
        with pytest.raises(ValueError):
            mc_ensemble(cfg, seed=1, samples=1)

    def test_drift_direction_in_salient_regime(self):
        # sign(P(t)) = -sign(W0) wherever the drift dominates the ensemble
        # standard error
        cfg = make_config(eigen_branches(build_w_pm(-1), PHI_PLUS))  # W0 = -1
        res = mc_ensemble(cfg, seed=42, samples=4000)
        salient = (0.1 * 1.0 * cfg.times
                   > 5 * res.analytic_std / np.sqrt(res.sample_count))
        assert salient.any()
        assert (res.mean[salient] > 0).all()

    def test_worker_count_does_not_change_result(self):
        cfg = make_config(eigen_branches(build_w_pm(-1), KET_00))
        serial = mc_ensemble(cfg, seed=9, samples=500, workers=1)
        pooled = mc_ensemble(cfg, seed=9, samples=500, workers=4)
        assert np.array_equal(serial.mean, pooled.mean)
        assert np.array_equal(serial.std, pooled.std)


class TestQuantumSurrogate:
    def test_frozen(self):
        model = quantum_surrogate(alpha=0.25, dim=40)
        assert model.frozen_residual == 0.0

    def test_canonical_constant_is_alpha(self):
        model = quantum_surrogate(alpha=0.17, dim=40)
        assert abs(model.g[0] - 0.17) <= 1e-9

    def test_momentum_conserved_by_free_hamiltonian(self):
        model = quantum_surrogate(alpha=0.25, dim=40)
        p = dict(model.observables)["P"]
        assert np.abs(model.h_e @ p - p @ model.h_e).max() <= 1e-12

    def test_drift_slope(self):
        model = quantum_surrogate(alpha=0.25, dim=56)
        rho_e = surrogate_ground_state(56)
        times = np.linspace(0, 6, 25)
        traj = evolve_full(model, PHI_PLUS, rho_e, times,
                           extra_observables={"top": boundary_projector(56)})
        assert np.abs(traj.series["top"]).max() <= 1e-8  # pre-boundary window
        slope = np.polyfit(times, traj.series["P"], 1)[0]
        w0 = traj.series["W"][0]
        assert abs(slope - (-0.25 * w0)) / abs(0.25 * w0) <= 0.02

    def test_sign_flip(self):
        # the |00> run populates the w=+3 branch, which drifts three times
        # faster; the window is kept short so neither run feels the boundary
        model = quantum_surrogate(alpha=0.25, dim=56)
        rho_e = surrogate_ground_state(56)
        times = np.linspace(0, 3, 25)
        up = evolve_full(model, PHI_PLUS, rho_e, times)      # W0 = -1
        down = evolve_full(model, KET_00, rho_e, times)      # W0 = +1
        s_up = np.polyfit(times, up.series["P"], 1)[0]
        s_down = np.polyfit(times, down.series["P"], 1)[0]
        assert abs(s_up + s_down) <= 1e-12

    def test_dimension_cap(self):
        with pytest.raises(ValueError, match="cap"):
            quantum_surrogate(alpha=0.1, dim=80)


class TestConfigValidation:
    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            make_config(single_branch(1.0), mass=-1.0)

    def test_rejects_zero_particles(self):
        with pytest.raises(ValueError):
            make_config(single_branch(1.0), n=0)
