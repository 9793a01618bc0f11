"""Named two-qubit states and the state mini-language used by config files.

Accepted specs: the strings ``phi+``, ``phi-``, ``psi+``, ``psi-``, ``00``,
``01``, ``10``, ``11``, ``mixed`` (maximally mixed), or an explicit 4x4
matrix given as nested ``[re, im]`` pairs.
"""

from __future__ import annotations

import numpy as np

from .operators import DensityMatrix, pure_state

_KETS = {
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
}
_BELL = {
    "phi+": (_KETS["00"] + _KETS["11"]) / np.sqrt(2),
    "phi-": (_KETS["00"] - _KETS["11"]) / np.sqrt(2),
    "psi+": (_KETS["01"] + _KETS["10"]) / np.sqrt(2),
    "psi-": (_KETS["01"] - _KETS["10"]) / np.sqrt(2),
}


def bell_state(name: str) -> np.ndarray:
    return _BELL[name].copy()


def named_state(name: str) -> DensityMatrix:
    key = name.strip().lower()
    if key in _BELL:
        return pure_state(_BELL[key])
    if key in _KETS:
        return pure_state(_KETS[key])
    if key in ("mixed", "maximally-mixed"):
        return DensityMatrix(np.eye(4, dtype=complex) / 4, space="system")
    raise ValueError(f"unknown state name {name!r}")


def parse_state(spec) -> DensityMatrix:
    """Accept a named state or a nested [re, im] 4x4 matrix."""
    if isinstance(spec, str):
        return named_state(spec)
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (4, 4, 2):
        raise ValueError("matrix state spec must be 4x4 entries of [re, im]")
    return DensityMatrix(arr[..., 0] + 1j * arr[..., 1], space="system")


def random_product_state(rng: np.random.Generator) -> DensityMatrix:
    """Random two-qubit product state rho_A (x) rho_B (Ginibre marginals)."""
    parts = []
    for _ in range(2):
        ginibre = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = ginibre @ ginibre.conj().T
        parts.append(rho / np.trace(rho).real)
    return DensityMatrix(np.kron(parts[0], parts[1]), space="system")
