"""Four-level atom in a single-mode cavity with witness-proportional coupling.

The Hamiltonian is

    H = sum_i eps_i |i><i| + omega a^dag a + gamma (|1><4| + |4><1|)(a + a^dag),

with the two-qubit computational basis mapped onto the four atomic levels
(|00>->|1>, |01>->|2>, |10>->|3>, |11>->|4>). Under that mapping the
Pauli correlator XX - YY equals 2(|1><4| + |4><1|), so the atomic flip term
is exactly half the correlator and the interaction reads

    gamma (|1><4| + |4><1|) = g_eff * (XX - YY),   g_eff = gamma / 2.

``g_eff`` is the coupling per unit of the Pauli-normalized witness; configs
carry the literal ``gamma`` and the rescaling is recorded on the
:class:`DisplacedFrame`.

Shifting the mode by its static response, a -> a_m = a - alpha with
alpha = |g_eff|/omega, regroups the Hamiltonian exactly (matrix identity,
valid at every truncation) into

    H = [atom terms + 2 alpha g_eff (XX - YY) + omega alpha^2]
        + omega a_m^dag a_m + |g_eff| W_pm (a_m + a_m^dag),

where W_pm = 1 +/- (XX - YY) and the sign is the sign of gamma. So the
shifted-mode drive is proportional to one of the two Bell witnesses. The
unitary displacement operator exp(alpha(a^dag - a)) realizes the same map
only away from the Fock truncation edge; its conjugation residual is
reported per interior depth rather than assumed.

Per witness branch (eigenvalue w of XX - YY) the cavity is a resonantly
driven oscillator, d<a>/dt = -i omega <a> - i g_eff w, giving from vacuum

    <a>(t) = -(lambda/omega)(1 - e^{-i omega t}),    lambda = g_eff * w,
    <X>(t) = -sqrt(2)(lambda/omega)(1 - cos omega t),
    <P>(t) = -sqrt(2)(lambda/omega) sin(omega t),

with X = (a + a^dag)/sqrt(2) and P = i(a^dag - a)/sqrt(2). These closed
forms are the independent oracle for the exact simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .operators import (
    DensityMatrix,
    destroy,
    number_op,
    quadrature_p,
    quadrature_x,
    tensor_product,
    thermal_state,
)
from .protocol import ProtocolModel, Trajectory, build_model, evolve_full
from .witness import build_w_pm, build_w_tilde, eigen_branches

TRUNCATION_GUARD = 1e-8
FRAME_INTERIOR_TOL = 1e-10
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class CavityConfig:
    epsilons: tuple[float, float, float, float]
    omega: float
    gamma: float
    n_max: int
    rho_s0: DensityMatrix
    env_init: str = "vacuum"          # "vacuum" | "thermal"
    env_beta: float | None = None
    times: np.ndarray | None = None
    frozen: bool = True

    def __post_init__(self):
        if self.n_max < 10:
            raise ValueError("n_max must be at least 10")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.frozen and self.epsilons[0] != self.epsilons[3]:
            raise ValueError("frozen evolution requires eps_1 == eps_4")
        if self.env_init == "thermal" and not self.env_beta:
            raise ValueError("thermal environment needs env_beta")
        if self.env_init not in ("vacuum", "thermal"):
            raise ValueError(f"unknown env_init {self.env_init!r}")
        if self.times is not None:
            object.__setattr__(self, "times", np.asarray(self.times, dtype=float))

    @property
    def dim_e(self) -> int:
        return self.n_max + 1

    @property
    def coupling(self) -> float:
        """Coupling per unit of the Pauli-normalized witness (gamma/2)."""
        return self.gamma / 2.0


def atom_hamiltonian(epsilons) -> np.ndarray:
    return np.diag(np.asarray(epsilons, dtype=float)).astype(complex)


def build_hamiltonian(config: CavityConfig) -> np.ndarray:
    """Full atom-cavity Hamiltonian on 4(n_max+1) dimensions."""
    dim = config.dim_e
    a = destroy(dim)
    flip = build_w_tilde() / 2.0      # |1><4| + |4><1| in the level basis
    ids = np.eye(4, dtype=complex)
    ide = np.eye(dim, dtype=complex)
    return (tensor_product(atom_hamiltonian(config.epsilons), ide)
            + tensor_product(ids, config.omega * number_op(dim))
            + config.gamma * tensor_product(flip, a + a.conj().T))


def build_cavity_model(config: CavityConfig) -> ProtocolModel:
    """Protocol-layer view: witness = XX - YY, h_int = g_eff (a + a^dag)."""
    dim = config.dim_e
    a = destroy(dim)
    interior = np.arange(dim) < dim - 1
    return build_model(
        h_s=atom_hamiltonian(config.epsilons),
        h_e=config.omega * number_op(dim),
        w=build_w_tilde(),
        h_int=config.coupling * (a + a.conj().T),
        observables=[("X", quadrature_x(dim)), ("P", quadrature_p(dim))],
        interior=interior,
        canonical=True,
        require_frozen=config.frozen)


def environment_state(config: CavityConfig) -> DensityMatrix:
    if config.env_init == "vacuum":
        rho = np.zeros((config.dim_e, config.dim_e), dtype=complex)
        rho[0, 0] = 1.0
        return DensityMatrix(rho, space="environment")
    return thermal_state(config.omega * number_op(config.dim_e), config.env_beta)


@dataclass(frozen=True)
class DisplacedFrame:
    alpha: float                      # |g_eff| / omega
    sign: int                         # sign of gamma
    coupling: float                   # |g_eff|, the drive per unit witness
    witness_label: str                # "plus" | "minus"
    witness: np.ndarray
    transformed_h: np.ndarray         # D^dag H D with the truncated unitary
    structure_residual: float         # exact shifted-mode regrouping, interior
    conjugation_residual: float       # D a D^dag vs a - alpha, interior
    interior_levels: int


def displaced_frame(config: CavityConfig, interior_margin: int = 3) -> DisplacedFrame:
    """Shifted-mode decomposition plus the truncated displacement unitary.

    The regrouping with a_m := a - alpha is an exact matrix identity and is
    verified to ``FRAME_INTERIOR_TOL`` on levels <= n_max - interior_margin.
    The conjugation route through exp(alpha(a^dag - a)) only reproduces
    a - alpha away from the truncation edge; its interior residual is
    measured and reported, not assumed.
    """
    if config.gamma == 0:
        raise ValueError("displaced frame is undefined at zero coupling")
    dim = config.dim_e
    a = destroy(dim)
    ide = np.eye(dim, dtype=complex)
    ids = np.eye(4, dtype=complex)
    g_eff = config.coupling
    alpha = abs(g_eff) / config.omega
    sign = 1 if config.gamma > 0 else -1
    wt = build_w_tilde()
    wpm = build_w_pm(sign)

    h = build_hamiltonian(config)
    a_m = a - alpha * ide
    shifted_atom = (atom_hamiltonian(config.epsilons)
                    + 2 * alpha * g_eff * wt
                    + config.omega * alpha**2 * ids)
    h_struct = (tensor_product(shifted_atom, ide)
                + tensor_product(ids, config.omega * a_m.conj().T @ a_m)
                + abs(g_eff) * tensor_product(wpm, a_m + a_m.conj().T))
    keep = np.arange(dim) <= config.n_max - interior_margin
    mask = np.kron(np.ones(4, dtype=bool), keep)
    diff = np.abs(h - h_struct)
    structure_residual = float(diff[np.ix_(mask, mask)].max())
    if structure_residual > FRAME_INTERIOR_TOL:
        raise ValueError(
            f"shifted-mode structure residual {structure_residual:.3e}; "
            f"raise n_max above {config.n_max}")

    disp = expm(alpha * (a.conj().T - a))
    unit_defect = np.abs(disp @ disp.conj().T - ide).max()
    if unit_defect > UNITARITY_TOL:
        u, _, vh = np.linalg.svd(disp)
        disp = u @ vh
    dfull = tensor_product(ids, disp)
    transformed = dfull.conj().T @ h @ dfull
    conj = disp @ a @ disp.conj().T - a_m
    conjugation_residual = float(np.abs(conj[np.ix_(keep, keep)]).max())
    return DisplacedFrame(
        alpha=alpha, sign=sign, coupling=abs(g_eff),
        witness_label="plus" if sign > 0 else "minus",
        witness=wpm, transformed_h=transformed,
        structure_residual=structure_residual,
        conjugation_residual=conjugation_residual,
        interior_levels=int(keep.sum()))


class TruncationError(RuntimeError):
    """Population reached the Fock truncation edge; results untrusted."""


def simulate(config: CavityConfig, dim_cap: int = 2048) -> Trajectory:
    """Exact composite run emitting <X>, <P>, <n> and the witness series.

    Series: ``X``, ``P``, ``n``, ``W`` (the interaction witness W_plus or
    W_minus selected by the sign of gamma; equal to XX - YY when gamma
    vanishes), plus ``W_tilde``, ``W_plus``, ``W_minus`` and the
    truncation monitor ``top_population``. The run fails if the top two
    Fock levels ever hold more than 1e-8 population.
    """
    if config.times is None:
        raise ValueError("config.times is required for simulate")
    dim = config.dim_e
    model = build_cavity_model(config)
    rho_e = environment_state(config)
    top = np.zeros((dim, dim), dtype=complex)
    top[dim - 1, dim - 1] = 1.0
    top[dim - 2, dim - 2] = 1.0
    traj = evolve_full(model, config.rho_s0, rho_e, config.times,
                       extra_observables={"n": number_op(dim), "top_population": top},
                       dim_cap=dim_cap)
    top_max = float(np.abs(traj.series["top_population"]).max())
    if top_max > TRUNCATION_GUARD:
        raise TruncationError(
            f"top-two Fock population reached {top_max:.3e} > "
            f"{TRUNCATION_GUARD:.1e}; rerun with n_max > {config.n_max} "
            f"(try {int(np.ceil(config.n_max * 1.5))})")
    wt_series = traj.series.pop("W")  # model witness is XX - YY
    series = dict(traj.series)
    series["W_tilde"] = wt_series
    series["W_plus"] = 1.0 + wt_series
    series["W_minus"] = 1.0 - wt_series
    if config.gamma > 0:
        series["W"] = series["W_plus"]
    elif config.gamma < 0:
        series["W"] = series["W_minus"]
    else:
        series["W"] = wt_series
    return Trajectory(times=traj.times, series=series)


def branch_quadrature_analytic(w_k: float, coupling: float, omega: float,
                               times: np.ndarray) -> dict[str, np.ndarray]:
    """Driven-oscillator closed forms for one witness branch, from vacuum.

    ``coupling`` is the signed drive per unit witness (g_eff for branches of
    XX - YY); the branch drive is lambda = coupling * w_k.
    """
    times = np.asarray(times, dtype=float)
    lam = coupling * w_k
    x = -np.sqrt(2) * (lam / omega) * (1.0 - np.cos(omega * times))
    p = -np.sqrt(2) * (lam / omega) * np.sin(omega * times)
    return {"X": x, "P": p}


def quadrature_mixture(config: CavityConfig) -> dict[str, np.ndarray]:
    """Branch-probability mixture of the closed forms (vacuum environment)."""
    branches = eigen_branches(build_w_tilde(), config.rho_s0)
    out = {"X": np.zeros(len(config.times)), "P": np.zeros(len(config.times))}
    for wk, pk in zip(branches.values, branches.probabilities):
        part = branch_quadrature_analytic(wk, config.coupling, config.omega,
                                          config.times)
        out["X"] += pk * part["X"]
        out["P"] += pk * part["P"]
    return out


def convergence_sweep(config: CavityConfig, n_max_list: list[int]) -> list[dict]:
    """Max-over-time quadrature change between consecutive truncations."""
    if list(n_max_list) != sorted(n_max_list):
        raise ValueError("n_max_list must ascend")
    rows: list[dict] = []
    prev = None
    for n_max in n_max_list:
        cfg = CavityConfig(epsilons=config.epsilons, omega=config.omega,
                           gamma=config.gamma, n_max=n_max,
                           rho_s0=config.rho_s0, env_init=config.env_init,
                           env_beta=config.env_beta, times=config.times,
                           frozen=config.frozen)
        traj = simulate(cfg)
        row = {"n_max": n_max}
        if prev is not None:
            row["delta_x"] = float(np.abs(traj.series["X"] - prev.series["X"]).max())
            row["delta_p"] = float(np.abs(traj.series["P"] - prev.series["P"]).max())
        rows.append(row)
        prev = traj
    return rows
