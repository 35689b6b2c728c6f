"""Numerical checks for periodic linear cocycles, rotation perturbation paths,
transition products and a piecewise-affine tangency unfolding."""

from .cocycle import (
    DichotomyReport,
    PeriodicCocycle,
    SplittingCandidate,
    bound_constant,
    check_n_dominated,
    cocycle_distance,
    domination_dichotomy,
    eigenspace_angle,
    min_domination_time,
    quotient_cocycle,
    return_map,
)
from .linalg import SpectralData, eigen_spectrum, operator_norm
from .paths import (
    CocyclePath,
    PathTrace,
    alpha_threshold,
    bounded_after_perturbation,
    build_rotation_path,
    complexify_double_eigenvalue,
    rotation_bound_check,
    trace_path,
    truncate_path,
    verify_path_contract,
)
from .transitions import TransitionSystem, build_Dn, non_power_witness, verify_homothety
from .unfolding import (
    REFERENCE_MODEL,
    CycleReport,
    UnfoldingModel,
    bifurcation_parameter,
    iterate,
    local_step,
    min_n_index_two,
    periodic_point,
    renormalize,
    return_derivative,
    return_step,
    tangency_reduction_stage1,
    tangency_reduction_stage2,
    validate_model,
    verify_cycle,
)

__version__ = "0.1.0"
