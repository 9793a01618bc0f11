"""Two-qubit entanglement witnesses built from the XX - YY Pauli correlator.

The base observable is ``sigma_x (x) sigma_x - sigma_y (x) sigma_y``, which in
the computational basis is ``2(|00><11| + |11><00|)``. Its expectation on any
product state lies in [-1, 1], so the pair of witnesses ``1 +/- (XX - YY)``
is nonnegative on all separable states; a negative expectation certifies
entanglement near one of the two Phi Bell states. Equivalently, entanglement
is certified whenever |<XX - YY>| > 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    SIGMA_X,
    SIGMA_Y,
    DensityMatrix,
    commutator,
    expectation,
    hermitian_eigen,
    require_hermitian,
    tensor_product,
)

DEGENERACY_TOL = 1e-9
CERTIFY_THRESHOLD = 1.0


def build_w_tilde() -> np.ndarray:
    """The XX - YY correlator; eigenvalues {-2, 0, 0, +2}."""
    return tensor_product(SIGMA_X, SIGMA_X) - tensor_product(SIGMA_Y, SIGMA_Y)


def build_w_pm(sign: int) -> np.ndarray:
    """Witness 1 + sign * (XX - YY) with sign = +1 or -1."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return np.eye(4, dtype=complex) + sign * build_w_tilde()


def witness_expectation(w: np.ndarray, rho_s: DensityMatrix) -> float:
    """Expectation of a Hermitian witness; negative values certify entanglement."""
    return expectation(w, rho_s)


def frozen_check(w: np.ndarray, h_s: np.ndarray) -> float:
    """Max entry magnitude of [w, h_s]; ~0 means the witness is frozen."""
    return float(np.abs(commutator(w, h_s)).max())


@dataclass(frozen=True)
class WitnessBranches:
    """Eigenbranches of a witness with occupation probabilities of a state.

    Degenerate eigenvalues (within ``DEGENERACY_TOL``) are grouped into a
    single branch; ``probabilities[k]`` is the trace of the state projected
    onto the whole eigenspace, which makes the split basis-independent.
    """

    values: np.ndarray            # one entry per distinct eigenvalue
    bases: tuple[np.ndarray, ...]  # orthonormal columns spanning each eigenspace
    probabilities: np.ndarray

    def __post_init__(self):
        p = self.probabilities
        if p.min() < -1e-12:
            raise ValueError(f"negative branch probability {p.min():.3e}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"branch probabilities sum to {p.sum()}")

    @property
    def expectation(self) -> float:
        return float(np.dot(self.values, self.probabilities))

    def projector(self, k: int) -> np.ndarray:
        b = self.bases[k]
        return b @ b.conj().T


def eigen_branches(w: np.ndarray, rho_s0: DensityMatrix) -> WitnessBranches:
    """Group the witness spectrum into branches and weight them by ``rho_s0``."""
    sys = hermitian_eigen(w)
    values, vectors = sys.values, sys.vectors
    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][0]] <= DEGENERACY_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])
    branch_vals = np.array([values[g].mean() for g in groups])
    bases = tuple(vectors[:, g] for g in groups)
    probs = np.array([
        np.trace(b.conj().T @ rho_s0.matrix @ b).real for b in bases
    ])
    probs = np.clip(probs, 0.0, None)
    branches = WitnessBranches(values=branch_vals, bases=bases, probabilities=probs)
    direct = witness_expectation(w, rho_s0)
    if abs(branches.expectation - direct) > 1e-10:
        raise ValueError(
            f"branch sum {branches.expectation} disagrees with trace {direct}"
        )
    return branches


@dataclass(frozen=True)
class WitnessReport:
    w_tilde_expectation: float
    w_plus: float
    w_minus: float
    certified: bool
    certifying_witness: str  # "plus" | "minus" | "none"
    sigma_w: float


def certify(rho_s: DensityMatrix) -> WitnessReport:
    """Evaluate both witnesses on a two-qubit state and report certification."""
    if rho_s.dim != 4:
        raise ValueError(f"expected a 4-dimensional state, got {rho_s.dim}")
    wt = build_w_tilde()
    wt_val = witness_expectation(wt, rho_s)
    w_plus = 1.0 + wt_val
    w_minus = 1.0 - wt_val
    if wt_val > CERTIFY_THRESHOLD:
        certifying = "minus"
        cert_op = build_w_pm(-1)
    elif wt_val < -CERTIFY_THRESHOLD:
        certifying = "plus"
        cert_op = build_w_pm(+1)
    else:
        certifying = "none"
        cert_op = wt
    mean = witness_expectation(cert_op, rho_s)
    second = expectation(require_hermitian(cert_op @ cert_op), rho_s)
    var = max(second - mean * mean, 0.0)
    return WitnessReport(
        w_tilde_expectation=wt_val,
        w_plus=w_plus,
        w_minus=w_minus,
        certified=abs(wt_val) > CERTIFY_THRESHOLD,
        certifying_witness=certifying,
        sigma_w=float(np.sqrt(var)),
    )
