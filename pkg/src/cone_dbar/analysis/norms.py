"""
Weighted L2, Lp, frame-derivative, integer Sobolev and spectral fractional norms
"""

from itertools import combinations_with_replacement
from typing import Union, Tuple, List
import logging
import math

import numpy as np
from scipy import fft
from scipy.integrate import quad, dblquad

from ..models.field_data import Grid, ScalarField, OneForm
from ..models.results import NormValue
from ..exceptions import InvalidInputError, UnderResolvedError, WraparoundRiskError
from ..config.settings import config
from .fields import partial_derivative, to_frame, to_coordinate
from .geometry import dyadic_levels
from .operators import apply_frame_field

logger = logging.getLogger(__name__)

Field = Union[ScalarField, OneForm]


def _components(f: Field) -> List[np.ndarray]:
    """Coefficient arrays, in the frame representation for forms"""
    if isinstance(f, OneForm):
        return list(to_frame(f).coefficients)
    return [f.values]


def _pointwise_abs2(f: Field) -> np.ndarray:
    return sum(np.abs(c) ** 2 for c in _components(f))


def volume_weights(grid: Grid) -> np.ndarray:
    """dV_X per cell: 1/2 |g| h^4 on the mask"""
    return np.where(grid.mask, 0.5 * grid.det_g * grid.cell_volume, 0.0)


def _divergence_flag(grid: Grid, density: np.ndarray) -> bool:
    """Dyadic-annulus contributions that do not decay toward the origin"""
    populated = density > 0
    if not populated.any():
        return False
    levels = np.broadcast_to(dyadic_levels(grid.gamma), grid.shape)
    innermost = sorted(np.unique(levels[populated]))[-config.norms.divergence_check_annuli:]
    if len(innermost) < 2:
        return False
    contributions = [float(density[levels == level].sum()) for level in innermost]
    return all(later >= earlier for earlier, later in zip(contributions, contributions[1:]))


def weighted_l2_norm(f: Field, k: float) -> NormValue:
    """
    (1/2 sum gamma^{2k} |f|^2 |g| h^4)^{1/2} over the mask

    Forms are measured through their frame coefficients; the coordinate-coefficient
    value is kept in the auxiliary output.
    """
    grid = f.grid
    weight = volume_weights(grid) * grid.gamma ** (2.0 * k)
    density = _pointwise_abs2(f) * weight
    value = math.sqrt(float(density.sum()))

    divergent = False
    if k < 0 and value > 0:
        divergent = _divergence_flag(grid, density)
        if divergent:
            logger.warning(f"L^{{2,{k:g}}} norm may diverge: annulus contributions grow toward the origin")

    auxiliary = {}
    if isinstance(f, OneForm):
        c1, c2 = to_coordinate(f).coefficients
        auxiliary['coordinate_value'] = math.sqrt(float(((np.abs(c1) ** 2 + np.abs(c2) ** 2) * weight).sum()))

    return NormValue(value=value, kind='L2k', parameters={'k': k}, quadrature_resolution=grid.n,
                     possibly_divergent=divergent, auxiliary=auxiliary)


def lp_norm(f: Field, p: float) -> NormValue:
    """(integral |f|^p dV_X)^{1/p}"""
    if p < 2:
        raise InvalidInputError(f"L^p norm requires p >= 2, got {p}")
    grid = f.grid
    magnitude = np.sqrt(_pointwise_abs2(f))
    total = float((magnitude ** p * volume_weights(grid)).sum())
    return NormValue(value=total ** (1.0 / p), kind='Lp', parameters={'p': p},
                     quadrature_resolution=grid.n)


def weight_lq_norm(grid: Grid, power: float, q: float) -> NormValue:
    """||gamma^{-power}||_{L^q(X)} over the mask"""
    if q < 1:
        raise InvalidInputError(f"L^q norm requires q >= 1, got {q}")
    weight = np.broadcast_to(grid.gamma ** (-power * q), grid.shape)
    total = float((weight * volume_weights(grid)).sum())
    return NormValue(value=total ** (1.0 / q), kind='Lp', parameters={'weight_power': power, 'q': q},
                     quadrature_resolution=grid.n)


def holder_exponent(p: float) -> float:
    """q with 1/2 = 1/p + 1/q"""
    if p <= 2:
        raise InvalidInputError(f"Hoelder step requires p > 2, got {p}")
    return 2.0 * p / (p - 2.0)


def frame_derivative_norm(f: OneForm, which: str, weight_power: float = 0.0) -> NormValue:
    """(sum_{i,j} ||gamma^a X_j f_i||^2)^{1/2} with X = L or Lbar"""
    if which not in ('L', 'Lbar'):
        raise InvalidInputError(f"frame derivative must be 'L' or 'Lbar', got '{which}'")
    frame_form = to_frame(f)
    grid = f.grid
    weight = grid.gamma ** weight_power
    total = 0.0
    for i in (1, 2):
        component = frame_form.component(i)
        for j in (1, 2):
            derivative = apply_frame_field(component, f'{which}{j}')
            total += weighted_l2_norm(derivative * weight, 0.0).squared
    return NormValue(value=math.sqrt(total), kind='LbarL',
                     parameters={'field': which, 'weight_power': weight_power},
                     quadrature_resolution=grid.n)


def multi_indices(order: int) -> List[Tuple[int, ...]]:
    """Derivative axis tuples of length 0..order (15 of them for order 2)"""
    result = []
    for length in range(order + 1):
        result.extend(combinations_with_replacement(range(4), length))
    return result


def sobolev_integer_norm(f: Field, s: int, k: float) -> NormValue:
    """
    (sum_{|l| <= s} sum gamma^{2k} |d^l f|^2 gamma^4 h^4)^{1/2}

    Raises:
        UnderResolvedError: for s above the configured maximum order
    """
    if s < 0:
        raise InvalidInputError(f"Sobolev order must be nonnegative, got {s}")
    if s > config.norms.max_sobolev_order:
        raise UnderResolvedError(f"W^{s} needs derivatives beyond order "
                                 f"{config.norms.max_sobolev_order} at this resolution")
    grid = f.grid
    weight = np.where(grid.mask, grid.gamma ** (2.0 * k + 4.0) * grid.cell_volume, 0.0)

    total = 0.0
    for values in _components(f):
        cache = {(): ScalarField(grid, values)}
        for index in multi_indices(s):
            if index not in cache:
                cache[index] = partial_derivative(cache[index[:-1]], index[-1])
            total += float((np.abs(cache[index].values) ** 2 * weight).sum())
    return NormValue(value=math.sqrt(total), kind='Wsk', parameters={'s': s, 'k': k},
                     quadrature_resolution=grid.n)


def _support_box(values: np.ndarray, threshold: float):
    magnitude = np.abs(values)
    peak = float(magnitude.max())
    if peak == 0:
        return None
    support = magnitude > threshold * peak
    box = []
    for axis in range(values.ndim):
        other = tuple(a for a in range(values.ndim) if a != axis)
        hits = np.flatnonzero(support.any(axis=other))
        box.append((int(hits[0]), int(hits[-1])))
    return box


def _lambda_energy(grid: Grid, values: np.ndarray, eps: float, weighted: bool,
                   threshold: float) -> float:
    """Sum of |Lambda^eps f|^2 (gamma^4) h^4 over the padded box"""
    box = _support_box(values, threshold)
    if box is None:
        return 0.0
    guard = config.norms.wraparound_cells
    for low, high in box:
        if low < guard or high > grid.n - 1 - guard:
            raise WraparoundRiskError(f"support within {guard} cells of the box edge")

    crop = values[tuple(slice(low - 1, high + 2) for low, high in box)]
    size = crop.shape
    padded_shape = tuple(config.norms.pad_factor * m for m in size)
    before = [(padded - m) // 2 for padded, m in zip(padded_shape, size)]
    padded = np.zeros(padded_shape, dtype=np.complex128)
    padded[tuple(slice(b, b + m) for b, m in zip(before, size))] = crop

    h = grid.h
    spectrum = fft.fftn(padded, overwrite_x=True, workers=config.harness.workers)
    radius2 = 0.0
    for axis, m in enumerate(padded_shape):
        zeta = 2.0 * np.pi * fft.fftfreq(m, d=h)
        shape = [1] * 4
        shape[axis] = m
        radius2 = radius2 + zeta.reshape(shape) ** 2
    spectrum *= (1.0 + radius2) ** (eps / 2.0)
    smoothed = fft.ifftn(spectrum, overwrite_x=True, workers=config.harness.workers)

    density = np.abs(smoothed) ** 2
    if weighted:
        # padded index q sits at original index (low - 1) - before + q
        gamma2 = 0.0
        for axis, ((low, _), b, m) in enumerate(zip(box, before, padded_shape)):
            index = np.arange(m) + (low - 1) - b
            coordinate = -grid.half_width + (index + 0.5) * h
            shape = [1] * 4
            shape[axis] = m
            gamma2 = gamma2 + coordinate.reshape(shape) ** 2
        density = density * gamma2 ** 2
    return float(density.sum()) * grid.cell_volume


def sobolev_fractional_norm(f: Field, eps: float, weighted: bool = True,
                            support_threshold: float = None) -> NormValue:
    """
    W^eps norm through the padded-box Fourier multiplier (1 + |zeta|^2)^{eps/2}

    The field is cropped to its support, zero-padded by the configured factor and
    transformed; the result is integrated against gamma^4 (or unweighted).

    Raises:
        WraparoundRiskError: when the support lies within the guard cells of the box edge
    """
    if not 0.0 <= eps <= 1.0:
        raise InvalidInputError(f"fractional order must lie in [0, 1], got {eps}")
    if support_threshold is None:
        support_threshold = config.norms.support_threshold
    total = sum(_lambda_energy(f.grid, values, eps, weighted, support_threshold)
                for values in _components(f))
    return NormValue(value=math.sqrt(total), kind='Weps',
                     parameters={'eps': eps, 'weighted': weighted},
                     quadrature_resolution=f.grid.n)


def gaussian_fractional_reference(sigma: float, eps: float) -> float:
    """
    Closed-form unweighted Lambda^eps norm of exp(-|x|^2 / (2 sigma^2)) on R^4

    ||Lambda^eps f||^2 = sigma^8 2 pi^2 int_0^inf (1 + r^2)^eps exp(-sigma^2 r^2) r^3 dr
    """
    integrand = lambda r: (1.0 + r * r) ** eps * math.exp(-sigma * sigma * r * r) * r ** 3
    value, _ = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return math.sqrt(sigma ** 8 * 2.0 * math.pi ** 2 * value)


def volume_reference() -> float:
    """1/2 int_B |g| d^4x = pi^2 (1 + pi/4)"""
    return math.pi ** 2 * (1.0 + math.pi / 4.0)


def volume_by_reduction() -> float:
    """
    The same volume by quadrature over a = |v|^2, b = |w|^2

    d^4x = pi^2 da db, |g| = 16ab + 4a^2 + 4b^2 and B is the quarter disc a^2 + b^2 < 1.
    """
    value, _ = dblquad(lambda b, a: 16.0 * a * b + 4.0 * a * a + 4.0 * b * b, 0.0, 1.0,
                       0.0, lambda a: math.sqrt(1.0 - a * a), epsabs=0.0, epsrel=1e-12)
    return 0.5 * math.pi ** 2 * value
