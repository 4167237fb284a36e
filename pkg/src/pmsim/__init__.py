"""Protective-measurement simulator.

Measure expectation values on a single quantum system without collapsing it:
protect the state with a Hamiltonian it is a non-degenerate eigenstate of,
couple a pointer adiabatically, and read tr(rho A) off the pointer shift.
From there: density-matrix tomography of a single system, quantum entropy
and its dynamics, and the fluctuation statistics that separate finite
collections of systems from the density matrix they approximate.
"""

from .dynamics import (
    DegenerateLevelError,
    Schedule,
    TimeDependentHamiltonian,
    adiabatic_gap,
    propagate,
    rotate_spin_to_z,
)
from .entropy import EntropyReport, entanglement_growth, entropy_under_unitary, von_neumann_entropy
from .hilbert import (
    DensityMatrix,
    Operator,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PureState,
    basis_state,
    eig_hermitian,
    expectation,
    identity,
    mix,
    partial_trace,
    tensor,
    trace_distance,
)
from .mixtures import (
    DrawRecord,
    FiniteEnsemble,
    averaged_spin_stats,
    beam_merge_demo,
    conditional_distribution,
    despagnat_experiment,
    ensemble_density_matrix,
    frequency_convergence,
    sample,
    total_spin_z_stats,
)
from .protective import (
    Apparatus,
    MeasurementOutcome,
    PointerOverflowError,
    ProtectiveSetup,
    build_protection_hamiltonian,
    error_scaling_study,
    run_protective,
    run_protective_entangled,
    setup_from_hamiltonian,
    synthetic_setup,
)
from .tomography import (
    ObservableSet,
    Tomogram,
    exact_tomogram,
    hermitian_basis,
    noisy_tomogram,
    reconstruct,
    tomograph_via_protective,
)

__version__ = "0.1.0"

__all__ = [
    "Apparatus",
    "DegenerateLevelError",
    "DensityMatrix",
    "DrawRecord",
    "EntropyReport",
    "FiniteEnsemble",
    "MeasurementOutcome",
    "ObservableSet",
    "Operator",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PointerOverflowError",
    "ProtectiveSetup",
    "PureState",
    "Schedule",
    "TimeDependentHamiltonian",
    "Tomogram",
    "adiabatic_gap",
    "averaged_spin_stats",
    "basis_state",
    "beam_merge_demo",
    "build_protection_hamiltonian",
    "conditional_distribution",
    "despagnat_experiment",
    "eig_hermitian",
    "ensemble_density_matrix",
    "entanglement_growth",
    "entropy_under_unitary",
    "error_scaling_study",
    "exact_tomogram",
    "expectation",
    "frequency_convergence",
    "hermitian_basis",
    "identity",
    "mix",
    "noisy_tomogram",
    "partial_trace",
    "propagate",
    "reconstruct",
    "rotate_spin_to_z",
    "run_protective",
    "run_protective_entangled",
    "sample",
    "setup_from_hamiltonian",
    "synthetic_setup",
    "tensor",
    "tomograph_via_protective",
    "total_spin_z_stats",
    "trace_distance",
    "von_neumann_entropy",
]
