"""rlab: a numerical laboratory for restriction-extension estimates on curves.

The package builds polynomial space curves with exact rational arithmetic,
evaluates the associated oscillatory operators on spheres, hyperplanes and
fractal-dimensional measures, constructs the extremal inputs that make the
decay exponents sharp, and sweeps frequency ranges to fit those exponents
empirically.
"""

from .curves import (
    Curve,
    TypeTuple,
    class_membership,
    detect_type,
    dyadic_rescale,
    eval_derivative,
    moment_curve,
    monomial_curve,
    poly_curve,
    rescale_curve,
    torsion_det,
    torsion_poly,
)
from .errors import (
    CalibrationError,
    CapabilityError,
    ComputationError,
    ConfigError,
    DegeneracyError,
    DomainError,
    FrameError,
    MonomialFormError,
    NotFiniteTypeError,
    ResolutionError,
    RlabError,
    SingularMatrixError,
    StationaryError,
)
from .exponents import (
    ExponentPoint,
    Region,
    alpha_general_region,
    beta,
    ceil_of,
    exponent_table,
    finite_type_region,
    hyperplane_omega,
    hyperplane_project,
    hyperplane_region,
    kappa,
    kappa_max_scan,
    kdim_region,
    kdim_threshold,
    predicted_excess,
    sphere_region,
    type_profile_max,
)
from .measures import (
    GraphPatch,
    QuadMeasure,
    SubmanifoldPatch,
    box_mass,
    cap_box_sigma_mass,
    dimension_audit,
    gauss_legendre,
    hyperplane_measure,
    patch_measure,
    pushforward_measure,
    scaled_measure,
    singular_alpha_measure,
    sphere_cap_graph,
    sphere_measure,
    sphere_resolution_for,
    sphere_spacing_rule,
    submanifold_builder,
)
from .oscillatory import (
    AmplitudeWindow,
    PhaseSpec,
    Segment,
    TestFunction,
    eval_field,
    extension_eval,
    extension_phase,
    field,
    graph_phase,
    indicator,
    lorentz_norm,
    lp_norm,
    lq_norm,
    phase_eval,
)
from .extremal import (
    NecessityRect,
    Parallelepiped,
    PartitionFamily,
    adapted_frame,
    box_phase_check,
    box_volume_exponent,
    bump_input,
    calibrate_c,
    curvature_matrix,
    grad_y,
    kdim_boxes,
    knapp_box,
    knapp_input,
    mixed_determinant,
    necessity_rect_sphere,
    partition_family,
    random_sign_input,
    reduced_phase,
    solve_stationary,
    stationary_residual,
)
from .harness import (
    BumpFamily,
    KdimResult,
    KhintchineResult,
    KnappFamily,
    PhaseDiagramResult,
    RandomFamily,
    SweepConfig,
    SweepRecord,
    SweepResult,
    decay_sweep,
    kdim_experiment,
    khintchine_experiment,
    ols_fit,
    phase_diagram,
    write_csv,
)
from .cli import cli_main

__version__ = "0.1.0"

__all__ = [
    "AmplitudeWindow",
    "CalibrationError",
    "CapabilityError",
    "ComputationError",
    "ConfigError",
    "Curve",
    "DegeneracyError",
    "DomainError",
    "ExponentPoint",
    "FrameError",
    "GraphPatch",
    "MonomialFormError",
    "NotFiniteTypeError",
    "PhaseSpec",
    "QuadMeasure",
    "Region",
    "ResolutionError",
    "RlabError",
    "Segment",
    "SingularMatrixError",
    "StationaryError",
    "SubmanifoldPatch",
    "TestFunction",
    "TypeTuple",
    "BumpFamily",
    "KdimResult",
    "KhintchineResult",
    "KnappFamily",
    "NecessityRect",
    "Parallelepiped",
    "PartitionFamily",
    "PhaseDiagramResult",
    "RandomFamily",
    "SweepConfig",
    "SweepRecord",
    "SweepResult",
    "adapted_frame",
    "alpha_general_region",
    "beta",
    "box_mass",
    "box_phase_check",
    "box_volume_exponent",
    "bump_input",
    "calibrate_c",
    "cap_box_sigma_mass",
    "ceil_of",
    "class_membership",
    "cli_main",
    "curvature_matrix",
    "decay_sweep",
    "detect_type",
    "dimension_audit",
    "dyadic_rescale",
    "eval_derivative",
    "eval_field",
    "exponent_table",
    "extension_eval",
    "extension_phase",
    "field",
    "finite_type_region",
    "gauss_legendre",
    "grad_y",
    "graph_phase",
    "hyperplane_measure",
    "hyperplane_omega",
    "hyperplane_project",
    "hyperplane_region",
    "indicator",
    "kappa",
    "kappa_max_scan",
    "kdim_boxes",
    "kdim_experiment",
    "kdim_region",
    "kdim_threshold",
    "khintchine_experiment",
    "knapp_box",
    "knapp_input",
    "lorentz_norm",
    "lp_norm",
    "lq_norm",
    "mixed_determinant",
    "moment_curve",
    "monomial_curve",
    "necessity_rect_sphere",
    "ols_fit",
    "partition_family",
    "patch_measure",
    "phase_diagram",
    "phase_eval",
    "poly_curve",
    "predicted_excess",
    "pushforward_measure",
    "random_sign_input",
    "reduced_phase",
    "rescale_curve",
    "scaled_measure",
    "singular_alpha_measure",
    "solve_stationary",
    "sphere_cap_graph",
    "sphere_measure",
    "sphere_resolution_for",
    "sphere_spacing_rule",
    "stationary_residual",
    "submanifold_builder",
    "torsion_det",
    "torsion_poly",
    "write_csv",
    "type_profile_max",
]
