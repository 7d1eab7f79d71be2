"""Quantum dynamics of a spin-1/2 wave packet in a divergence-free Stern-Gerlach field."""
from .approximations import (
    APPROXIMATIONS,
    FieldFrame,
    adiabatic_wavefunction,
    coherent_state_wavefunction,
    field_frame,
    local_frame_components,
    pseudo_adiabatic_wavefunction,
    symmetrized_inner,
    symmetrized_wavefunction,
    wigner_d_half,
)
from .basis import BasisSpec, coeffs_to_grid, grid_to_coeffs, ho_eigenfunction, ho_table, make_grid
from .core import (
    FrameMismatchError,
    GridSpinor,
    PhysicalParams,
    PolarizationVector,
    SimParams,
    SpinorCoeffs,
    ValidationError,
    initial_state,
    params_from_physical,
)
from .evolution import (
    EvolutionRecord,
    IntegrationError,
    UndefinedDriftError,
    drift_time,
    evolve_in_magnet,
    free_drift,
    ode_rhs,
    run_exact,
)
from .observables import (
    ObservableReport,
    RunPair,
    asymmetry_maps,
    build_report,
    component_moments,
    lobe_moments,
    overlap,
    probability_density,
    spin_flip_density,
    spin_flip_probability,
    textbook_asymmetry,
)
from .runs import approximation_pair, exact_pair, exact_records, suggest_n_basis
from .textbook import semiclassical_spin_flip, textbook_drift_position, textbook_trajectory
from .tomography import (
    AsymmetryBasis,
    DegenerateBasisError,
    TomographyFit,
    predicted_density,
    reconstruct_polarization,
)

__version__ = "0.1.0"
