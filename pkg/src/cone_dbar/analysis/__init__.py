"""
Numerical engines: geometry, fields, operators, norms, estimates and convergence studies
"""

from .geometry import (covering_map, metric_at, frame_at, FrameField, grid_frame, verify_xi_order,
                       verify_xi_order_arrays, structure_coefficients_at, sample_annulus,
                       sample_interior_points, fit_growth_exponent, frame_growth_exponents)
from .fields import (partial_derivative, wirtinger, to_frame, to_coordinate, make_test_form,
                     mollify)
from .operators import (dbar_function, dbar_oneform, dbar_oneform_frame, dbar_star,
                        apply_frame_field, commutator, frame_decomposition_residual)
from .norms import (weighted_l2_norm, lp_norm, weight_lq_norm, frame_derivative_norm,
                    sobolev_integer_norm, sobolev_fractional_norm, gaussian_fractional_reference)
from .estimates import EstimateEvaluator, evaluate_estimate
from .convergence import friedrichs_study, summarize_sweep, FRIEDRICHS_OPERATORS

__all__ = [
    'covering_map', 'metric_at', 'frame_at', 'FrameField', 'grid_frame', 'verify_xi_order',
    'verify_xi_order_arrays', 'structure_coefficients_at', 'sample_annulus', 'sample_interior_points',
    'fit_growth_exponent', 'frame_growth_exponents',
    'partial_derivative', 'wirtinger', 'to_frame', 'to_coordinate', 'make_test_form', 'mollify',
    'dbar_function', 'dbar_oneform', 'dbar_oneform_frame', 'dbar_star', 'apply_frame_field',
    'commutator', 'frame_decomposition_residual',
    'weighted_l2_norm', 'lp_norm', 'weight_lq_norm', 'frame_derivative_norm', 'sobolev_integer_norm',
    'sobolev_fractional_norm', 'gaussian_fractional_reference',
    'EstimateEvaluator', 'evaluate_estimate', 'friedrichs_study', 'summarize_sweep', 'FRIEDRICHS_OPERATORS',
]
