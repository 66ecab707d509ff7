"""
Mollifier convergence studies and sweep verdict statistics
"""

from typing import Dict, Any, List, Sequence, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd

from ..models.field_data import Grid, ScalarField, OneForm, COORDINATE
from ..models.results import ConvergenceTable
from ..exceptions import InvalidInputError, UnderResolvedError
from ..config.settings import config
from .fields import mollify, to_coordinate, to_frame
from .geometry import fit_growth_exponent
from .norms import weighted_l2_norm
from .operators import apply_frame_field, dbar_star

logger = logging.getLogger(__name__)

SCALAR_OPERATORS = ('multiply', 'L1', 'L2', 'Lbar1', 'Lbar2')
FORM_OPERATORS = ('curl', 'star')
FRIEDRICHS_OPERATORS = SCALAR_OPERATORS + FORM_OPERATORS


def lift_to_form(u: ScalarField) -> OneForm:
    """(u, conj u) as coordinate coefficients"""
    return OneForm(u.grid, u.values, np.conj(u.values), COORDINATE)


def apply_first_order(which: str, f: Union[ScalarField, OneForm]) -> ScalarField:
    """One of the operators of the Friedrichs study"""
    if which == 'multiply':
        return f * (1.0 / (1.0 + f.grid.gamma ** 2))
    if which in ('L1', 'L2', 'Lbar1', 'Lbar2'):
        return apply_frame_field(f, which)
    if which == 'curl':
        frame_form = to_frame(f)
        return (apply_frame_field(frame_form.component(2), 'Lbar1')
                - apply_frame_field(frame_form.component(1), 'Lbar2'))
    if which == 'star':
        return dbar_star(f)
    raise InvalidInputError(f"unknown operator '{which}'")


def study_window(n: int, eps_list: Sequence[float]) -> Tuple[Grid, float]:
    """
    Origin-centred window resolving every eps at n points per axis, and the half width
    of the cube around the vertex on which errors are measured

    The spacing sits just below eps_min / 2. Every point of the cube keeps its mollifier
    ball and its difference stencil inside the window, so mollified values there do not
    see the window edge.

    Raises:
        UnderResolvedError: when the cube would be narrower than one cell
    """
    eps_list = [float(eps) for eps in eps_list]
    h = 0.98 * min(eps_list) / 2.0
    grid = Grid(n=n, half_width=n * h / 2.0)
    depth = grid.half_width - max(eps_list) - 2.0 * grid.h
    if depth < grid.h:
        raise UnderResolvedError(f"eps range {max(eps_list):g}..{min(eps_list):g} does not fit "
                                 f"a window of {n} points (measured cube {depth:.3g})")
    return grid, depth


def cube_region(grid: Grid, half_width: float) -> np.ndarray:
    """Grid points with every |x_i| <= half_width"""
    inside = np.ones((1, 1, 1, 1), dtype=bool)
    for axis in range(4):
        inside = inside & (np.abs(grid.coordinate(axis)) <= half_width)
    return np.broadcast_to(inside, grid.shape)


def prepare_input(f: Union[ScalarField, OneForm], which: str) -> Union[ScalarField, OneForm]:
    """The field an operator of the study acts on: functions as given, forms in coordinates"""
    if which not in FRIEDRICHS_OPERATORS:
        raise InvalidInputError(f"unknown operator '{which}'")
    if which in FORM_OPERATORS:
        if isinstance(f, ScalarField):
            f = lift_to_form(f)
        return to_coordinate(f)
    if isinstance(f, OneForm):
        raise InvalidInputError(f"operator '{which}' acts on functions")
    return f


def friedrichs_study(f: Union[ScalarField, OneForm], which: str, eps_list: Sequence[float],
                     region: np.ndarray = None,
                     smoothed: Sequence[Union[ScalarField, OneForm]] = None) -> ConvergenceTable:
    """
    ||D(f_eps) - D f||_{L2(X)} along a decreasing eps sequence

    Forms are mollified in their coordinate coefficients; a scalar passed to a form
    operator is lifted to (u, conj u). The study passes when no step grows by more than
    the step tolerance and final/initial is at most (eps_last / eps_first)^min_order.

    Args:
        f: Field to mollify
        which: Operator name from FRIEDRICHS_OPERATORS
        eps_list: Strictly decreasing mollifier radii
        region: Boolean mask restricting the L2 error (whole grid when omitted)
        smoothed: Already mollified prepare_input(f, which), one per eps

    Raises:
        UnderResolvedError: when an eps is below 2h
    """
    f = prepare_input(f, which)
    eps_list = [float(eps) for eps in eps_list]
    if len(eps_list) < 2 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInputError("eps_list must hold at least two strictly decreasing values")
    if min(eps_list) < 2.0 * f.grid.h:
        raise UnderResolvedError(f"eps = {min(eps_list):g} below 2h = {2.0 * f.grid.h:.4g}")
    if smoothed is None:
        smoothed = [mollify(f, eps) for eps in eps_list]
    elif len(smoothed) != len(eps_list):
        raise InvalidInputError("one smoothed field per eps is required")

    exact = apply_first_order(which, f)
    errors = []
    for eps, field in zip(eps_list, smoothed):
        difference = apply_first_order(which, field) - exact
        if region is not None:
            difference = difference * region
        errors.append(weighted_l2_norm(difference, 0.0).value)
        logger.debug(f"Friedrichs {which}: eps={eps:g} error={errors[-1]:.6g}")

    harness = config.harness
    violations = sum(1 for a, b in zip(errors, errors[1:]) if b > a * (1.0 + harness.friedrichs_step_tol))
    final_ratio = errors[-1] / errors[0] if errors[0] > 0 else 0.0
    order = fit_growth_exponent(eps_list, errors) if min(errors) > 0 else None
    target = (eps_list[-1] / eps_list[0]) ** harness.friedrichs_min_order

    table = ConvergenceTable(operator=which, eps=eps_list, errors=errors, observed_order=order,
                             step_violations=violations, final_ratio=final_ratio)
    table.passed = violations == 0 and final_ratio <= target
    return table


def summarize_sweep(rows: pd.DataFrame, n_list: List[int]) -> Dict[str, Any]:
    """
    Verdict statistics over the rows of one sweep

    Ratios of degenerate (RHS = 0) and failed rows are excluded. The sweep is stable when
    the maximum ratio drifts by at most the stability tolerance between the coarsest and
    finest resolution, and trend-free when the per-radius maximum never grows by more than
    the trend tolerance as the support shrinks.
    """
    ok = rows[rows['status'] == 'ok']
    summary: Dict[str, Any] = {
        'degenerate_rows': int((rows['status'] == 'degenerate').sum()),
        'failed_rows': int(rows['status'].str.startswith('error').sum()),
    }
    if ok.empty:
        summary.update({'max_ratio': None, 'stable': False, 'trend_ok': False, 'passed': False})
        return summary

    per_radius = ok.groupby('support_radius')['ratio'].max().sort_index(ascending=False)
    per_resolution = ok.groupby('n')['ratio'].max().sort_index()
    max_ratio = float(ok['ratio'].max())

    first = per_resolution.get(min(n_list))
    last = per_resolution.get(max(n_list))
    if first is None or last is None or not first > 0:
        drift = math.inf
    else:
        drift = abs(float(last) - float(first)) / float(first)

    maxima = per_radius.to_numpy()
    growth = [b / a - 1.0 for a, b in zip(maxima, maxima[1:]) if a > 0]
    trend_violation = max([0.0] + growth)

    stable = drift <= config.harness.stability_tol
    trend_ok = trend_violation <= config.harness.trend_tol
    summary.update({
        'max_ratio': max_ratio,
        'mean_ratio': float(ok['ratio'].mean()),
        'per_radius_max': {f"{radius:g}": float(value) for radius, value in per_radius.items()},
        'per_resolution_max': {str(int(n)): float(value) for n, value in per_resolution.items()},
        'drift': drift if math.isfinite(drift) else None,
        'stable': bool(stable),
        'trend_violation': float(trend_violation),
        'trend_ok': bool(trend_ok),
        'passed': bool(math.isfinite(max_ratio) and stable and trend_ok),
    })
    return summary
