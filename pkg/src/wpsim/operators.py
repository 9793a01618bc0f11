"""Dense complex operator algebra and exact unitary time evolution.

All operators are plain numpy ``complex128`` square arrays. Composite spaces
use the Kronecker convention of :func:`numpy.kron`: the first factor is the
slow (most significant) index, so ``tensor_product(A, B)`` acts on basis
states ``|i_A, j_B>`` ordered with ``i_A`` outermost. Every scenario module
in this package relies on that ordering.

The evolution generator for a closed system with Hamiltonian ``H`` is taken
as ``d rho/dt = i [rho, H]``, which is the same flow as the more common
``-i [H, rho]``; both give ``rho(t) = exp(-iHt) rho(0) exp(+iHt)``. Since
every generator here is Hermitian, propagation goes through one
eigendecomposition instead of a Pade matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERM_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = 1e-10
IMAG_TOL = 1e-10

# Pauli matrices and the 2x2 identity, used throughout the witness and
# scenario modules.
ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_operator(a: np.ndarray) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    return bool(np.abs(a - a.conj().T).max() <= tol)


def require_hermitian(a: np.ndarray, name: str = "operator", tol: float = HERM_TOL) -> np.ndarray:
    a = as_operator(a)
    defect = np.abs(a - a.conj().T).max()
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian (max asymmetry {defect:.3e} > {tol:.1e})")
    return a


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor slow."""
    return np.kron(as_operator(a), as_operator(b))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"commutator dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def destroy(dim: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on ``dim`` Fock levels."""
    if dim < 2:
        raise ValueError("need at least two levels")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadrature_x(dim: int) -> np.ndarray:
    """X = (a + a^dag)/sqrt(2)."""
    a = destroy(dim)
    return (a + a.conj().T) / np.sqrt(2)


def quadrature_p(dim: int) -> np.ndarray:
    """P = i (a^dag - a)/sqrt(2), so that [X, P] = i away from the truncation edge."""
    a = destroy(dim)
    return 1j * (a.conj().T - a) / np.sqrt(2)


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    ``values`` ascend; ``vectors[:, k]`` is the normalized eigenvector of
    ``values[k]``. Reconstruction and orthonormality are checked to 1e-10
    at construction.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        u = self.vectors
        ortho = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
        if ortho > EIG_TOL:
            raise ValueError(f"eigenvector orthonormality defect {ortho:.3e}")

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def hermitian_eigen(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a Hermitian operator, values ascending."""
    a = require_hermitian(a)
    values, vectors = np.linalg.eigh(a)
    sys = EigenSystem(values=values, vectors=vectors)
    recon = np.abs(sys.reconstruct() - a).max()
    if recon > EIG_TOL:
        raise ValueError(f"eigendecomposition reconstruction error {recon:.3e}")
    return sys


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix with a label for the space it lives on.

    Validation: unit trace to 1e-12, Hermitian, smallest eigenvalue
    >= -1e-10.
    """

    matrix: np.ndarray
    space: str = "composite"
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = as_operator(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not self.validate:
            return
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} is not 1 within {TRACE_TOL:.1e}")
        if not is_hermitian(m):
            raise ValueError("density matrix is not Hermitian")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -1e-10:
            raise ValueError(f"negative eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def pure_state(vec: np.ndarray, space: str = "system") -> DensityMatrix:
    """|psi><psi| from a state vector (normalized here)."""
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), space=space)


def evolve(h: np.ndarray, rho: DensityMatrix, t: float) -> DensityMatrix:
    """Conjugate ``rho`` by ``exp(-i h t)`` (Hermitian ``h``)."""
    h = require_hermitian(h, "evolution generator")
    if h.shape[0] != rho.dim:
        raise ValueError(f"dimension mismatch: h {h.shape[0]} vs rho {rho.dim}")
    values, vectors = np.linalg.eigh(h)
    phases = np.exp(-1j * values * t)
    rot = vectors.conj().T @ rho.matrix @ vectors
    rot = (phases[:, None] * rot) * phases.conj()[None, :]
    out = vectors @ rot @ vectors.conj().T
    out = 0.5 * (out + out.conj().T)  # scrub roundoff asymmetry
    return DensityMatrix(out, space=rho.space)


def partial_trace(rho: DensityMatrix, dim_a: int, dim_b: int, keep: str = "a") -> DensityMatrix:
    """Trace out one tensor factor of a state on ``dim_a * dim_b``."""
    if dim_a * dim_b != rho.dim:
        raise ValueError(f"cannot factor dim {rho.dim} as {dim_a} x {dim_b}")
    r = rho.matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "a":
        red = np.einsum("ijkj->ik", r)
        label = "system"
    elif keep == "b":
        red = np.einsum("ijil->jl", r)
        label = "environment"
    else:
        raise ValueError("keep must be 'a' or 'b'")
    return DensityMatrix(red, space=label)


def expectation(obs: np.ndarray, rho: DensityMatrix) -> float:
    """Re tr(obs rho); raises if the imaginary residue exceeds 1e-10."""
    obs = require_hermitian(obs, "observable")
    if obs.shape[0] != rho.dim:
        raise ValueError(f"dimension mismatch: obs {obs.shape[0]} vs rho {rho.dim}")
    val = np.trace(obs @ rho.matrix)
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}; state corrupted?")
    return float(val.real)


def thermal_state(h: np.ndarray, beta: float, space: str = "environment") -> DensityMatrix:
    """Gibbs state exp(-beta h)/Z, stabilized by subtracting the ground energy."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    h = require_hermitian(h, "Hamiltonian")
    values, vectors = np.linalg.eigh(h)
    weights = np.exp(-beta * (values - values.min()))
    weights /= weights.sum()
    rho = (vectors * weights) @ vectors.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, space=space)
