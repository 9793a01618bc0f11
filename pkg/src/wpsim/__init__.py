"""wpsim: witness-coupled environment signatures of entanglement.

A bipartite system couples to its environment through an interaction
proportional to an entanglement witness; coarse environment observables
then drift in a direction set by the witness sign. The package provides
the generic protocol engine plus three worked environments (ideal gas,
multimode radiation field, single-mode cavity with a four-level atom),
each validated against independent closed-form oracles.
"""

__version__ = "0.1.0"

from .operators import (
    DensityMatrix,
    EigenSystem,
    commutator,
    destroy,
    evolve,
    expectation,
    hermitian_eigen,
    partial_trace,
    pure_state,
    tensor_product,
    thermal_state,
)
from .witness import (
    WitnessBranches,
    WitnessReport,
    build_w_pm,
    build_w_tilde,
    certify,
    eigen_branches,
    frozen_check,
    witness_expectation,
)
from .protocol import (
    ProtocolModel,
    Trajectory,
    assemble_total,
    branch_evolve,
    build_model,
    estimate_witness,
    evolve_full,
    fit_canonical,
    fit_closure,
    solve_observable_ode,
)
from .states import named_state, parse_state
