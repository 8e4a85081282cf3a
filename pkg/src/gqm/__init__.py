"""Geometric quantum mechanics on finite-dimensional projective state
spaces: Fubini-Study geometry, spinor state-space constructions, a geodesic
entanglement measure, Hamiltonian (linear and nonlinear) flows, geometric
phase, geometric uncertainty relations and ensemble states."""

__version__ = "0.1.0"

from ._kernels import backend_name
from .dynamics import (
    HamiltonianFunction,
    SpectralData,
    Trajectory,
    action_variables,
    characteristic_residual,
    evolve_exact,
    flow_integrate,
    flow_jacobian_determinant,
    frequency_table,
    killing_deviation,
    modified_schrodinger_step,
    speed_check,
    transport_state,
)
from .ensembles import (
    DensityMatrix,
    EnsembleState,
    density_matrix,
    gibbs_ensemble,
    liouville_transport,
    maxent_ensemble,
    unconditional_expectation,
    unconditional_variance,
)
from .entangle import (
    BipartiteSpace,
    EntanglementReport,
    Quadric,
    brute_force_delta,
    entanglement_measure,
    maximal_family,
    nearest_farthest,
    polar_plane,
    polar_point,
    segre_embed,
    singlet_measurement,
    singlet_state,
)
from .phase import Loop, holonomy_phase, poincare_invariant_check, surface_phase
from .projective import (
    chart_complex_structure,
    chart_metric,
    chart_symplectic,
    conjugate_hyperplane,
    geodesic_distance,
    gradient,
    line_join,
    observable_function,
    projective_schrodinger_residual,
    transition_probability,
)
from .spinors import (
    Spinor,
    SymSpinor,
    chord_decomposition,
    conjugate_spinor,
    measurement_probabilities,
    principal_spinors,
    spin_eigenstates,
    tau,
    veronese,
)
from .states import (
    ChartPoint,
    DualState,
    Observable,
    ProjectiveLine,
    PureState,
    get_default_hbar,
    set_default_hbar,
)
from .stats import (
    MomentSet,
    central_moments,
    generalized_heisenberg_bound,
    geometric_variance,
    kahler_inequality_terms,
    poisson_bracket,
)
