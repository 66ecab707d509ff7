"""
The dbar complex on the cone: dbar, its adjoint, frame vector fields and commutators
"""

from typing import List, Sequence
import logging

import numpy as np

from ..models.field_data import ScalarField, OneForm, COORDINATE, FRAME
from ..models.results import OperatorOutput
from ..exceptions import InvalidInputError, SupportViolationError
from ..config.settings import config
from .fields import wirtinger, to_frame, to_coordinate
from .geometry import grid_frame

logger = logging.getLogger(__name__)

FRAME_FIELDS = ('L1', 'L2', 'Lbar1', 'Lbar2')


def dbar_function(u: ScalarField) -> OneForm:
    """(du/dvbar, du/dwbar) in the coordinate representation"""
    return OneForm(u.grid, wirtinger(u, 'vbar').values, wirtinger(u, 'wbar').values, COORDINATE)


def dbar_oneform(f: OneForm) -> ScalarField:
    """dvbar ^ dwbar coefficient d f_2 / dvbar - d f_1 / dwbar"""
    c1, c2 = to_coordinate(f).coefficients
    grid = f.grid
    return ScalarField(grid, wirtinger(ScalarField(grid, c2), 'vbar').values
                       - wirtinger(ScalarField(grid, c1), 'wbar').values)


def dbar_oneform_frame(f: OneForm) -> ScalarField:
    """Coefficient of dbar f against omegabar_1 ^ omegabar_2"""
    frame = grid_frame(f.grid)
    # omegabar_1 ^ omegabar_2 = conj(det alpha) dvbar ^ dwbar, det alpha real
    return ScalarField(f.grid, dbar_oneform(f).values / frame.det_alpha)


def check_support(f: OneForm, cells: int = 1) -> None:
    if not f.grid.clears_boundary(f.support, cells):
        raise SupportViolationError(
            f"form support reaches within {cells} cell(s) of the mask or window edge")


def dbar_star(f: OneForm) -> ScalarField:
    """
    L2(X) adjoint of dbar on functions

    dbar* f = -(1/|g|) [d/dv (|g| (g^{11} c_1 + g^{12} c_2)) + d/dw (|g| (g^{21} c_1 + g^{22} c_2))]
    with c the coordinate coefficients and |g| g^{-1} = adj(g).

    Raises:
        SupportViolationError: when the support touches the mask or window edge
    """
    check_support(f)
    grid = f.grid
    c1, c2 = to_coordinate(f).coefficients
    a, b = grid.abs_v2, grid.abs_w2
    v, w = grid.v, grid.w
    # adj(g) = [[g22, -g12], [-g21, g11]]
    flux_v = (a + 4.0 * b) * c1 - v * np.conj(w) * c2
    flux_w = -np.conj(v) * w * c1 + (4.0 * a + b) * c2
    divergence = (wirtinger(ScalarField(grid, flux_v), 'v').values
                  + wirtinger(ScalarField(grid, flux_w), 'w').values)
    return ScalarField(grid, -divergence / grid.det_g)


def apply_frame_field(u: ScalarField, which: str) -> ScalarField:
    """L_i u = beta_i1 du/dv + beta_i2 du/dw; Lbar_i is the conjugate field"""
    if which not in FRAME_FIELDS:
        raise InvalidInputError(f"unknown frame field '{which}'")
    frame = grid_frame(u.grid)
    i = int(which[-1])
    if which.startswith('Lbar'):
        return ScalarField(u.grid, np.conj(frame.beta(i, 1)) * wirtinger(u, 'vbar').values
                           + np.conj(frame.beta(i, 2)) * wirtinger(u, 'wbar').values)
    return ScalarField(u.grid, frame.beta(i, 1) * wirtinger(u, 'v').values
                       + frame.beta(i, 2) * wirtinger(u, 'w').values)


def _first_order_fields(u: ScalarField) -> np.ndarray:
    """(L_1 u, L_2 u, Lbar_1 u, Lbar_2 u) stacked on the last axis"""
    return np.stack([apply_frame_field(u, which).values for which in FRAME_FIELDS], axis=-1)


def commutator(j: int, k: int, u: ScalarField, probes: Sequence[ScalarField] = None) -> OperatorOutput:
    """
    [L_j, Lbar_k] u and its pointwise expansion in L_1, L_2, Lbar_1, Lbar_2

    Coefficients solve, at every point, the regularized least-squares problem over the
    probe fields (u alone when no probes are given, which yields the minimum-norm expansion).
    Points where every probe's first-order fields vanish are marked skipped.

    Returns:
        OperatorOutput with principal = L_j Lbar_k u - Lbar_k L_j u, the four coefficient
        fields, the skipped mask and residual = principal - expansion applied to u
    """
    if j not in (1, 2) or k not in (1, 2):
        raise InvalidInputError(f"frame indices must be 1 or 2, got ({j}, {k})")

    def bracket(field: ScalarField) -> np.ndarray:
        return (apply_frame_field(apply_frame_field(field, f'Lbar{k}'), f'L{j}').values
                - apply_frame_field(apply_frame_field(field, f'L{j}'), f'Lbar{k}').values)

    grid = u.grid
    principal = bracket(u)
    probe_list: List[ScalarField] = [u] + list(probes or [])

    # Normal equations (M^* M + lambda I) x = M^* y, summed over probes
    normal = np.zeros(grid.shape + (4, 4), dtype=np.complex128)
    rhs = np.zeros(grid.shape + (4,), dtype=np.complex128)
    u_fields = None
    for probe in probe_list:
        fields = _first_order_fields(probe)
        target = principal if probe is u else bracket(probe)
        normal += np.conj(fields)[..., :, None] * fields[..., None, :]
        rhs += np.conj(fields) * target[..., None]
        if probe is u:
            u_fields = fields

    scale = np.real(np.trace(normal, axis1=-2, axis2=-1))
    regularization = config.norms.lstsq_regularization
    skipped = grid.mask & (scale <= regularization * max(float(scale.max()), 1e-300))
    damping = regularization * np.where(scale > 0, scale, 1.0)
    normal = normal + damping[..., None, None] * np.eye(4)
    coefficients = np.linalg.solve(normal, rhs[..., None])[..., 0]
    coefficients[skipped] = 0.0

    if np.any(skipped):
        logger.warning(f"[L{j}, Lbar{k}] expansion skipped {int(np.count_nonzero(skipped))} "
                       f"ill-conditioned points")

    expansion = np.sum(coefficients * u_fields, axis=-1)
    return OperatorOutput(
        principal=ScalarField(grid, principal),
        residual=ScalarField(grid, principal - expansion),
        coefficients=[ScalarField(grid, coefficients[..., index]) for index in range(4)],
        skipped=skipped,
    )


def frame_decomposition_residual(f: OneForm, which: str = 'dbar') -> OperatorOutput:
    """
    Leading frame term of dbar f or dbar* f and the remainder against the full operator

    dbar:  principal = Lbar_1 f_2 - Lbar_2 f_1 (coefficient of omegabar_1 ^ omegabar_2)
    star:  principal = -(L_1 f_1 + L_2 f_2)
    """
    frame_form = to_frame(f)
    grid = f.grid
    f1, f2 = frame_form.component(1), frame_form.component(2)

    if which == 'dbar':
        principal = apply_frame_field(f2, 'Lbar1') - apply_frame_field(f1, 'Lbar2')
        full = dbar_oneform_frame(frame_form)
    elif which == 'star':
        principal = -(apply_frame_field(f1, 'L1') + apply_frame_field(f2, 'L2'))
        full = dbar_star(frame_form)
    else:
        raise InvalidInputError(f"unknown decomposition '{which}'")

    return OperatorOutput(principal=principal, residual=ScalarField(grid, full.values - principal.values))
