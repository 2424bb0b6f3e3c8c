"""Ising optimization on a simulated network of Kerr-nonlinear parametric
oscillators: ground- and excited-state adiabatic protocols, quantum-jump
dissipation, spectra, and readout statistics."""

__version__ = "0.1.0"

from .fock import (
    FockCutoff,
    QuantumState,
    apply_hopping,
    apply_mode_operator,
    mode_occupations,
    photon_parity,
    single_photon_state,
    top_level_populations,
    vacuum_state,
)
from .ising import (
    IsingInstance,
    brute_force_solve,
    energy_landscape,
    hard_instance,
    ising_energy,
    load_instance,
    random_instance,
    save_instance,
)
from .hamiltonian import (
    KpoNetworkOperator,
    KpoParameters,
    apply_effective_nonhermitian,
    apply_hamiltonian,
    coherent_product_state,
    final_hamiltonian_check,
    schedule_at,
)
from .dynamics import (
    IntegratorConfig,
    TrajectoryRecord,
    dense_master_evolve,
    evolve_quantum_jump,
    evolve_schrodinger,
    run_trajectory_ensemble,
)
from .readout import (
    RunMetrics,
    SignProjector,
    build_sign_projector,
    compute_metrics,
    configuration_probabilities,
)
from .spectrum import (
    ReducedBasis,
    SpectrumTrace,
    build_reduced_basis,
    reduced_hamiltonian,
    single_kpo_diagonalize,
    trace_spectrum,
)
from .engine import NumericalError
