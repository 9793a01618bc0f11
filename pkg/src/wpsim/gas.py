"""Ideal-gas environment: analytic drift, thermal fluctuations, Monte Carlo.

A 1-D cloud of N free particles couples to the system through a potential
linear in every coordinate, so the center-of-mass momentum obeys

    P(t) = -alpha * W0 * t,

where W0 is the frozen witness expectation: an entangled state (W0 < 0)
drags the cloud toward rising coordinates, a separable one the other way.
Classically the thermal spread around that drift is

    Sigma_P(t) = sqrt(alpha^2 Sigma_W^2 t^2 + m/(N beta)),

with Sigma_W the witness standard deviation on the initial system state.
The Monte Carlo oracle samples a witness branch per shot (probability p_k),
draws N Maxwell-Boltzmann momenta (variance m/beta each), and adds the
per-branch drift -alpha w_k t. Natural units: hbar = k_B = 1.

Randomness uses the counter-based Philox generator keyed as
(seed, sample_index), so every sample owns a named, platform-stable stream
and ensembles are reproducible and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DensityMatrix, destroy
from .protocol import ProtocolModel, Trajectory, build_model
from .witness import WitnessBranches, build_w_pm

SURROGATE_DIM_CAP = 64


@dataclass(frozen=True)
class GasConfig:
    n_particles: int
    mass: float
    beta: float
    alpha: float
    branches: WitnessBranches
    times: np.ndarray

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.mass <= 0 or self.beta <= 0:
            raise ValueError("mass and beta must be positive")
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))


def analytic_momentum(alpha: float, w0: float, times: np.ndarray) -> Trajectory:
    """Mean drift -alpha * W0 * t."""
    times = np.asarray(times, dtype=float)
    return Trajectory(times=times, series={"P": -alpha * w0 * times})


def analytic_sigma(alpha: float, sigma_w: float, times: np.ndarray,
                   mass: float, n_particles: int, beta: float) -> Trajectory:
    """Thermal-plus-branch spread sqrt(alpha^2 Sigma_W^2 t^2 + m/(N beta))."""
    times = np.asarray(times, dtype=float)
    var = (alpha * sigma_w * times) ** 2 + mass / (n_particles * beta)
    return Trajectory(times=times, series={"sigma_P": np.sqrt(var)})


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Philox stream for one sample, keyed by (seed, index)."""
    return np.random.Generator(np.random.Philox(key=np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)))


def _draw_sample(config: GasConfig, rng: np.random.Generator) -> tuple[float, float]:
    """One shot: (thermal center-of-mass offset, branch eigenvalue)."""
    k = rng.choice(len(config.branches.values), p=config.branches.probabilities)
    momenta = rng.normal(0.0, np.sqrt(config.mass / config.beta),
                         size=config.n_particles)
    return float(momenta.mean()), float(config.branches.values[k])


def mc_sample(config: GasConfig, seed: int, index: int = 0) -> np.ndarray:
    """A single P(t) path; deterministic function of (config, seed, index)."""
    offset, wk = _draw_sample(config, sample_stream(seed, index))
    return offset - config.alpha * wk * config.times


@dataclass(frozen=True)
class GasEnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    analytic_mean: np.ndarray
    analytic_std: np.ndarray
    sample_count: int
    max_abs_z: float  # worst z-score of the ensemble mean vs the analytic drift

    def as_trajectory(self) -> Trajectory:
        return Trajectory(
            times=self.times,
            series={"mean": self.mean, "analytic_mean": self.analytic_mean,
                    "analytic_std": self.analytic_std},
            stds={"mean": self.std})


def mc_ensemble(config: GasConfig, seed: int, samples: int,
                workers: int = 1) -> GasEnsembleResult:
    """Monte Carlo ensemble statistics against the closed-form curves.

    Each path is offset - alpha*w_k*t, so only (offset, w_k) pairs are
    stored; paths are expanded lazily per time grid. Samples are keyed by
    index, so the result is identical for any worker count, and the
    reduction order is fixed (ascending sample index).
    """
    if samples < 2:
        raise ValueError("need at least two samples for a standard deviation")
    offsets = np.empty(samples)
    branch_vals = np.empty(samples)

    def fill(lo: int, hi: int):
        for i in range(lo, hi):
            offsets[i], branch_vals[i] = _draw_sample(config, sample_stream(seed, i))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        step = max(64, samples // (8 * workers) + 1)
        spans = [(lo, min(lo + step, samples)) for lo in range(0, samples, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda s: fill(*s), spans))
    else:
        fill(0, samples)
    times = config.times
    paths_mean_offset = offsets.mean()
    mean = paths_mean_offset - config.alpha * branch_vals.mean() * times
    # std over samples at each grid time, without materializing all paths
    centered_off = offsets - offsets.mean()
    centered_w = branch_vals - branch_vals.mean()
    var = (np.mean(centered_off**2)
           - 2 * config.alpha * times * np.mean(centered_off * centered_w)
           + (config.alpha * times) ** 2 * np.mean(centered_w**2))
    std = np.sqrt(np.maximum(var * samples / (samples - 1), 0.0))
    w0 = config.branches.expectation
    sigma_w = float(np.sqrt(max(
        np.dot(config.branches.values**2, config.branches.probabilities) - w0**2, 0.0)))
    ana_mean = analytic_momentum(config.alpha, w0, times).series["P"]
    ana_std = analytic_sigma(config.alpha, sigma_w, times, config.mass,
                             config.n_particles, config.beta).series["sigma_P"]
    z = np.abs(mean - ana_mean) / (ana_std / np.sqrt(samples))
    return GasEnsembleResult(
        times=times, mean=mean, std=std, analytic_mean=ana_mean,
        analytic_std=ana_std, sample_count=samples, max_abs_z=float(z.max()))


def position_momentum(dim: int, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Finite position/momentum pair from ladder operators; [R, P] = i except
    for the defect at the top level."""
    a = destroy(dim)
    r = scale * (a + a.conj().T) / np.sqrt(2)
    p = 1j * (a.conj().T - a) / (np.sqrt(2) * scale)
    return r, p


def quantum_surrogate(alpha: float, dim: int = 56, mass: float = 4.0,
                      scale: float = 1.0,
                      witness: np.ndarray | None = None) -> ProtocolModel:
    """Single-particle quantum model of the gas coupling at toy scale.

    A free particle (H_e = P^2/2m) built from finite ladder matrices, with
    interaction alpha*R. The drift law holds on the interior subspace
    (all levels but the top one); populations must stay off the boundary
    for the drift to be trusted, so pair this with a wavepacket initial
    state such as the ladder ground state.
    """
    if dim > SURROGATE_DIM_CAP:
        raise ValueError(f"surrogate dimension {dim} exceeds cap {SURROGATE_DIM_CAP}")
    r, p = position_momentum(dim, scale)
    h_e = p @ p / (2.0 * mass)
    h_int = alpha * r
    w = witness if witness is not None else build_w_pm(-1)
    # diagonal in the computational basis with equal 1-4 entries: commutes
    # with both Bell-type witnesses
    h_s = np.diag([0.3, 0.1, 0.2, 0.3]).astype(complex)
    interior = np.arange(dim) < dim - 1
    return build_model(h_s, h_e, w, h_int,
                       observables=[("P", p)], interior=interior,
                       canonical=True, require_frozen=True)


def surrogate_ground_state(dim: int) -> DensityMatrix:
    """Ladder ground state: a Gaussian wavepacket at rest."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityMatrix(rho, space="environment")


def boundary_projector(dim: int, levels: int = 2) -> np.ndarray:
    """Projector onto the top ``levels`` ladder states (truncation monitor)."""
    proj = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - levels, dim):
        proj[i, i] = 1.0
    return proj
