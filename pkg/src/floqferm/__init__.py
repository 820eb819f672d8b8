"""Nonunitary Floquet spin chains via free fermions."""

__version__ = "0.1.0"

from .model import (
    DisorderSpec,
    MajoranaMatrix,
    ModelParams,
    a_index,
    b_index,
    build_h_xx,
    build_h_y,
    build_h_zz,
    canonical_ordering,
    matrix_from_terms,
)
from .spectrum import (
    AntisymmetricDecomposition,
    FloquetMatrix,
    QuasiSpectrum,
    analytic_quasi_energies,
    analytic_spectrum,
    build_floquet_matrix,
    classify_phase,
    diagonalize_hamiltonian,
    exp_factor,
    finite_size_splitting,
    gap_condition,
    momentum_grid,
    quasi_energies,
)
from .edge import (
    EdgeMode,
    TransferMatrix,
    analytic_edge_mode,
    boundary_matrix_m,
    boundary_matrix_mode,
    contracting_eigenvalue,
    floquet_kernel_mode,
    smallest_m_eigenvalue,
    transfer_matrix,
    verify_mode,
)
from .gaussian import (
    CorrelationState,
    entanglement_entropy,
    evolve,
    evolve_ode,
    evolve_to_steady,
    initial_fock_state,
    observables,
    overlap_magnitude,
    pfaffian,
    resolve_ode_cubic_sign,
    steady_state,
    step,
    step_matrix,
    string_correlator,
    w_matrix,
)
