"""Coupled-model assembly, structural fits, and the observable drift law.

A model couples a small "system" carrying entanglement to an environment
through ``H_int = w (x) h_int``, where ``w`` is an entanglement witness.
When ``[w, h_s] = 0`` the witness expectation is a constant of motion
("frozen"), and the composite evolution block-diagonalizes over witness
eigenspaces: each branch ``k`` evolves the environment alone under
``h_e + w_k h_int`` with weight ``p_k``. That branch mixture is used here
as an independent oracle for the exact composite propagation.

If additionally the chosen environment observables close linearly,

    [h_e, G_j]   = i sum_k c_jk G_k      (coefficients real),
    [h_int, G_j] = i g_j * identity      (valid on an interior subspace),

their means obey the linear drift law

    dG_j/dt + sum_k c_jk G_k + g_j W0 = 0,

with ``W0`` the (frozen) witness expectation. ``solve_observable_ode``
integrates that law both in closed form and with a Runge-Kutta cross-check.
The canonical condition cannot hold exactly for bounded matrices, so the
fit for ``g`` is evaluated on a caller-designated interior subspace and the
truncation boundary is monitored separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .operators import DensityMatrix, commutator, require_hermitian, tensor_product
from .witness import WitnessBranches, frozen_check

FROZEN_TOL = 1e-12
CLOSURE_TOL = 1e-9
CANONICAL_TOL = 1e-8
ODE_CROSSCHECK_TOL = 1e-8
DEFAULT_DIM_CAP = 2048


@dataclass(frozen=True)
class Trajectory:
    """A time grid with named series of real means (optionally stds)."""

    times: np.ndarray
    series: dict[str, np.ndarray]
    stds: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        for name, s in self.series.items():
            if len(s) != len(t):
                raise ValueError(f"series {name!r} length {len(s)} != {len(t)} times")


def assemble_total(h_s: np.ndarray, h_e: np.ndarray, w: np.ndarray,
                   h_int: np.ndarray) -> np.ndarray:
    """Total Hamiltonian h_s (x) 1 + 1 (x) h_e + w (x) h_int."""
    h_s = require_hermitian(h_s, "h_s")
    h_e = require_hermitian(h_e, "h_e")
    w = require_hermitian(w, "witness")
    h_int = require_hermitian(h_int, "h_int")
    if w.shape != h_s.shape:
        raise ValueError("witness and system Hamiltonian dimensions differ")
    if h_int.shape != h_e.shape:
        raise ValueError("interaction and environment Hamiltonian dimensions differ")
    ids = np.eye(h_s.shape[0], dtype=complex)
    ide = np.eye(h_e.shape[0], dtype=complex)
    return (tensor_product(h_s, ide) + tensor_product(ids, h_e)
            + tensor_product(w, h_int))


class ClosureError(ValueError):
    """The environment commutators do not stay in the observable span."""


def fit_closure(h_e: np.ndarray, observables: list[np.ndarray],
                names: list[str] | None = None,
                tol: float = CLOSURE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Fit [h_e, G_j] = i sum_k c_jk G_k by least squares.

    Returns (c, residuals) with ``c`` real (the imaginary part of the fit
    must vanish since commutators of Hermitians are anti-Hermitian).
    Raises :class:`ClosureError` naming the first offending observable if a
    residual exceeds ``tol``.
    """
    h_e = require_hermitian(h_e, "h_e")
    obs = [require_hermitian(g, f"G_{j}") for j, g in enumerate(observables)]
    labels = names or [f"G_{j}" for j in range(len(obs))]
    basis = np.stack([(1j * g).ravel() for g in obs], axis=1)
    c = np.zeros((len(obs), len(obs)))
    residuals = np.zeros(len(obs))
    for j, g in enumerate(obs):
        rhs = commutator(h_e, g).ravel()
        coef, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
        res = np.abs(basis @ coef - rhs).max()
        if res > tol:
            raise ClosureError(
                f"closure violated for {labels[j]}: residual {res:.3e} > {tol:.1e}")
        if np.abs(coef.imag).max() > 1e-10:
            raise ClosureError(
                f"closure constants for {labels[j]} are not real "
                f"(imag {np.abs(coef.imag).max():.3e})")
        c[j] = coef.real
        residuals[j] = res
    return c, residuals


class CanonicalError(ValueError):
    """The interaction commutators are not proportional to the identity."""


def fit_canonical(h_int: np.ndarray, observables: list[np.ndarray],
                  interior: np.ndarray,
                  tol: float = CANONICAL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Fit [h_int, G_j] = i g_j * identity on an interior subspace.

    ``interior`` is a boolean mask selecting the rows/columns away from the
    truncation boundary. The fit averages the interior diagonal of
    ``-i [h_int, G_j]`` (a full-space trace would vanish identically:
    finite-dimensional commutators are traceless) and the residual is the
    max deviation over the interior block.
    """
    h_int = require_hermitian(h_int, "h_int")
    interior = np.asarray(interior, dtype=bool)
    idx = np.where(interior)[0]
    if idx.size == 0:
        raise ValueError("interior subspace is empty")
    g = np.zeros(len(observables))
    residuals = np.zeros(len(observables))
    for j, obs in enumerate(observables):
        obs = require_hermitian(obs, f"G_{j}")
        m = -1j * commutator(h_int, obs)
        block = m[np.ix_(idx, idx)]
        gj = np.trace(block) / idx.size
        if abs(gj.imag) > 1e-10:
            raise CanonicalError(f"constant for G_{j} is not real (imag {gj.imag:.3e})")
        res = np.abs(block - gj.real * np.eye(idx.size)).max()
        if res > tol:
            raise CanonicalError(
                f"canonical condition rejected for G_{j}: interior residual "
                f"{res:.3e} > {tol:.1e}")
        g[j] = gj.real
        residuals[j] = res
    return g, residuals


@dataclass(frozen=True)
class ProtocolModel:
    """Assembled witness-coupled model with validated structure constants."""

    h_s: np.ndarray
    h_e: np.ndarray
    w: np.ndarray
    h_int: np.ndarray
    observables: tuple[tuple[str, np.ndarray], ...]
    c: np.ndarray | None
    g: np.ndarray | None
    interior: np.ndarray | None
    frozen_residual: float
    require_frozen: bool = field(default=True, repr=False)

    @property
    def frozen(self) -> bool:
        return self.frozen_residual <= FROZEN_TOL

    @property
    def dim_s(self) -> int:
        return self.h_s.shape[0]

    @property
    def dim_e(self) -> int:
        return self.h_e.shape[0]


def build_model(h_s, h_e, w, h_int, observables,
                interior: np.ndarray | None = None,
                canonical: bool = True,
                require_frozen: bool = True) -> ProtocolModel:
    """Validate and assemble a :class:`ProtocolModel`.

    ``observables`` is a list of (name, matrix) pairs on the environment
    space. The linear closure is always fitted; the canonical fit runs only
    when ``canonical`` is set and needs an ``interior`` mask. Set
    ``require_frozen=False`` for deliberate control experiments with a
    drifting witness.
    """
    names = [n for n, _ in observables]
    mats = [m for _, m in observables]
    res = frozen_check(w, h_s)
    if require_frozen and res > FROZEN_TOL:
        raise ValueError(f"[w, h_s] residual {res:.3e} exceeds {FROZEN_TOL:.1e}; "
                         "witness would not be frozen")
    c, _ = fit_closure(h_e, mats, names)
    g = None
    if canonical:
        if interior is None:
            raise ValueError("canonical fit requires an interior mask")
        g, _ = fit_canonical(h_int, mats, interior)
    return ProtocolModel(
        h_s=np.asarray(h_s, dtype=complex), h_e=np.asarray(h_e, dtype=complex),
        w=np.asarray(w, dtype=complex), h_int=np.asarray(h_int, dtype=complex),
        observables=tuple((n, np.asarray(m, dtype=complex)) for n, m in observables),
        c=c, g=g, interior=interior, frozen_residual=res,
        require_frozen=require_frozen)


def _rk4_linear(c: np.ndarray, forcing: np.ndarray, g0: np.ndarray,
                times: np.ndarray) -> np.ndarray:
    """Fixed-step classic RK4 for dG/dt = -c G - forcing."""
    lam = np.abs(np.linalg.eigvals(c)).max() if c.size else 0.0
    span = times[-1] - times[0]
    h_cap = 1.0 / (20.0 * lam) if lam > 0 else np.inf
    if lam > 0:
        h_acc = (1.2e-7 / (span * lam ** 5)) ** 0.25
        h_cap = min(h_cap, h_acc)
    out = np.empty((len(times), len(g0)))
    out[0] = g0
    y = np.asarray(g0, dtype=float)

    def f(state):
        return -(c @ state) - forcing

    for i in range(1, len(times)):
        dt = times[i] - times[i - 1]
        n_sub = max(1, int(np.ceil(dt / h_cap))) if np.isfinite(h_cap) else 1
        h = dt / n_sub
        for _ in range(n_sub):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = y
    return out


def solve_observable_ode(c: np.ndarray, g: np.ndarray, w0: float,
                         g_init: np.ndarray, times: np.ndarray,
                         names: list[str] | None = None) -> Trajectory:
    """Integrate dG/dt + c G + g W0 = 0 in closed form, with an RK4 cross-check.

    The particular solution uses the augmented-matrix exponential

        exp(t [[-c, -g W0], [0, 0]]) = [[exp(-c t), phi(t)], [0, 1]],

    which handles singular ``c`` (pure drift) with no special casing. The
    closed form and the RK4 path must agree to 1e-8 or a ValueError is
    raised.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    g = np.asarray(g, dtype=float).ravel()
    g_init = np.asarray(g_init, dtype=float).ravel()
    times = np.asarray(times, dtype=float)
    n = c.shape[0]
    if c.shape != (n, n) or len(g) != n or len(g_init) != n:
        raise ValueError("inconsistent shapes for c, g, G(0)")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = -c
    aug[:n, n] = -g * w0
    closed = np.empty((len(times), n))
    for i, t in enumerate(times):
        block = expm(aug * (t - times[0]))
        closed[i] = block[:n, :n] @ g_init + block[:n, n]
    rk = _rk4_linear(c, g * w0, g_init, times)
    dev = np.abs(closed - rk).max()
    if dev > ODE_CROSSCHECK_TOL:
        raise ValueError(f"closed-form vs RK4 deviation {dev:.3e} > "
                         f"{ODE_CROSSCHECK_TOL:.1e}")
    labels = names or [f"G_{j}" for j in range(n)]
    series = {labels[j]: closed[:, j] for j in range(n)}
    series.update({f"{labels[j]}_rk": rk[:, j] for j in range(n)})
    return Trajectory(times=times, series=series)


def _expectation_series(h: np.ndarray, rho0: np.ndarray,
                        observables: dict[str, np.ndarray],
                        times: np.ndarray) -> dict[str, np.ndarray]:
    """<O>(t) for unitary evolution under Hermitian h, via one eigh.

    Works in the eigenbasis where conjugation by exp(-iHt) is an
    elementwise phase: tr(O rho(t)) = sum_{mn} A[m,n] exp(-i(E_m - E_n)t)
    with A = (V^† rho0 V) * (V^† O V)^T summed over chunks of times.
    """
    values, vectors = np.linalg.eigh(h)
    rho_t = vectors.conj().T @ rho0 @ vectors
    gaps = np.subtract.outer(values, values).ravel()
    amps = {}
    for name, obs in observables.items():
        obs_t = vectors.conj().T @ obs @ vectors
        amps[name] = (rho_t * obs_t.T).ravel()
    out = {name: np.empty(len(times)) for name in observables}
    chunk = max(1, int(4e6 // max(gaps.size, 1)))
    for lo in range(0, len(times), chunk):
        t_blk = times[lo:lo + chunk]
        phases = np.exp(np.outer(-1j * t_blk, gaps))
        for name, a in amps.items():
            vals = phases @ a
            out[name][lo:lo + len(t_blk)] = vals.real
    return out


def evolve_full(model: ProtocolModel, rho_s0: DensityMatrix, rho_e0: DensityMatrix,
                times: np.ndarray,
                extra_observables: dict[str, np.ndarray] | None = None,
                dim_cap: int = DEFAULT_DIM_CAP) -> Trajectory:
    """Exact composite evolution; emits every observable mean plus the witness.

    Initial state is the product rho_s0 (x) rho_e0. Environment observables
    are lifted as 1 (x) G; the witness as w (x) 1 (series name ``W``).
    ``extra_observables`` adds diagnostic environment-space series.
    """
    dim = model.dim_s * model.dim_e
    if dim > dim_cap:
        raise ValueError(f"composite dimension {dim} exceeds cap {dim_cap}")
    if rho_s0.dim != model.dim_s or rho_e0.dim != model.dim_e:
        raise ValueError("initial state dimensions do not match the model")
    h = assemble_total(model.h_s, model.h_e, model.w, model.h_int)
    rho0 = tensor_product(rho_s0.matrix, rho_e0.matrix)
    ids = np.eye(model.dim_s, dtype=complex)
    ide = np.eye(model.dim_e, dtype=complex)
    lifted = {name: tensor_product(ids, g) for name, g in model.observables}
    if extra_observables:
        for name, g in extra_observables.items():
            lifted[name] = tensor_product(ids, g)
    lifted["W"] = tensor_product(model.w, ide)
    times = np.asarray(times, dtype=float)
    series = _expectation_series(h, rho0, lifted, times)
    return Trajectory(times=times, series=series)


def branch_evolve(model: ProtocolModel, branches: WitnessBranches,
                  rho_e0: DensityMatrix, times: np.ndarray) -> Trajectory:
    """Witness-branch mixture of environment-only evolutions.

    Valid only for frozen models: each branch evolves rho_e0 under
    ``h_e + w_k h_int`` and the means are mixed with the branch
    probabilities, in fixed branch order.
    """
    if not model.frozen:
        raise ValueError(
            f"branch evolution requires a frozen witness; residual "
            f"{model.frozen_residual:.3e}")
    times = np.asarray(times, dtype=float)
    obs = dict(model.observables)
    acc = {name: np.zeros(len(times)) for name in obs}
    for wk, pk in zip(branches.values, branches.probabilities):
        if pk == 0.0:
            continue
        h_branch = model.h_e + wk * model.h_int
        part = _expectation_series(h_branch, rho_e0.matrix, obs, times)
        for name in obs:
            acc[name] += pk * part[name]
    acc["W"] = np.full(len(times), branches.expectation)
    return Trajectory(times=times, series=acc)


def estimate_witness(traj: Trajectory, c: np.ndarray, g: np.ndarray,
                     names: list[str] | None = None) -> np.ndarray:
    """Invert the drift law for W0 from observable series (diagnostic only).

    Uses centered finite differences for dG/dt, so the estimate is noisy at
    the grid ends and anywhere the drift law itself is only approximate.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    g = np.asarray(g, dtype=float).ravel()
    labels = names or list(traj.series)[: len(g)]
    data = np.stack([traj.series[n] for n in labels], axis=1)
    dots = np.gradient(data, traj.times, axis=0)
    usable = np.abs(g) > 1e-12
    if not usable.any():
        raise ValueError("all drift constants vanish; witness is unobservable here")
    est = -(dots[:, usable] + data @ c.T[:, usable]) / g[usable]
    return est.mean(axis=1)
