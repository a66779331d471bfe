"""curvelab: numerical workbench for bilinear operators along polynomial curves."""

from .polynomials import Polynomial, fit_decay_exponent, level_set_measure, real_roots_with_orders, truncate_term
from .report import ExperimentReport
from .signals import (
    CutoffFamily,
    GridFunction,
    convolve,
    default_family,
    hl_maximal,
    littlewood_paley_piece,
    lp_norm,
    weak_lp_quasinorm,
)
from .scales import ScalePartition, classify_scales, shifted_scale_set, verify_cardinality_bound
from .operators import (
    OperatorResult,
    apply_H_truncated,
    apply_M,
    apply_Tj,
    multiplier_Mmn,
    operator_ratio,
    per_scale_json,
    restricted_Tj_alpha,
    restricted_Tjh,
)
from .oscillatory import (
    PhasePair,
    SmoothFn,
    bilinear_oscillatory_decay,
    dk_norm,
    inverse_derivatives,
    inverse_function,
    mixed_derivative_floor_Q,
    oscillatory_integral,
    perturbation_pair_check,
    phase_phi,
    sublevel_check,
)
from .sharpness import (
    CounterexampleInstance,
    build_counterexample_endpoint,
    build_counterexample_rootorder,
    endpoint_scaling_experiment,
    rootorder_scaling_experiment,
)
from .tiling import (
    DyadicInterval,
    Tile,
    Tree,
    build_tiles,
    exceptional_set,
    greedy_tree_selection,
    tree_size,
    whitney_decompose,
    whitney_pair_properties,
)

__all__ = [
    "Polynomial",
    "truncate_term",
    "real_roots_with_orders",
    "level_set_measure",
    "fit_decay_exponent",
    "ExperimentReport",
    "GridFunction",
    "CutoffFamily",
    "default_family",
    "lp_norm",
    "weak_lp_quasinorm",
    "littlewood_paley_piece",
    "hl_maximal",
    "convolve",
    "ScalePartition",
    "classify_scales",
    "verify_cardinality_bound",
    "shifted_scale_set",
    "OperatorResult",
    "apply_Tj",
    "apply_H_truncated",
    "apply_M",
    "restricted_Tj_alpha",
    "restricted_Tjh",
    "multiplier_Mmn",
    "operator_ratio",
    "per_scale_json",
    "SmoothFn",
    "PhasePair",
    "oscillatory_integral",
    "sublevel_check",
    "phase_phi",
    "dk_norm",
    "inverse_function",
    "inverse_derivatives",
    "perturbation_pair_check",
    "bilinear_oscillatory_decay",
    "mixed_derivative_floor_Q",
    "CounterexampleInstance",
    "build_counterexample_endpoint",
    "endpoint_scaling_experiment",
    "build_counterexample_rootorder",
    "rootorder_scaling_experiment",
    "DyadicInterval",
    "Tile",
    "Tree",
    "exceptional_set",
    "whitney_decompose",
    "whitney_pair_properties",
    "build_tiles",
    "tree_size",
    "greedy_tree_selection",
]
