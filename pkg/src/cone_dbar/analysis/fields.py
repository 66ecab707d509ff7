"""
Finite differences, representation changes, test-form generation and mollification on grids
"""

from itertools import product
from typing import Union
import logging
import math

import numpy as np
from scipy.signal import fftconvolve

from ..models.field_data import Grid, ScalarField, OneForm, TestFormSpec, COORDINATE, FRAME
from ..exceptions import InvalidInputError, UnderResolvedError
from ..config.settings import config
from .geometry import grid_frame

logger = logging.getLogger(__name__)

WIRTINGER = ('v', 'vbar', 'w', 'wbar')


def _shift(values: np.ndarray, axis: int, offset: int) -> np.ndarray:
    """out[i] = values[i + offset] along axis, zero-filled past the window"""
    out = np.zeros_like(values)
    n = values.shape[axis]
    target = [slice(None)] * values.ndim
    source = [slice(None)] * values.ndim
    if offset > 0:
        target[axis] = slice(0, n - offset)
        source[axis] = slice(offset, n)
    else:
        target[axis] = slice(-offset, n)
        source[axis] = slice(0, n + offset)
    out[tuple(target)] = values[tuple(source)]
    return out


def partial_derivative(f: ScalarField, axis: int) -> ScalarField:
    """
    d f / d x_{axis+1}

    Centred second order where both neighbours are in the mask, one-sided second order
    at mask and window edges, first order where only one neighbour exists.
    """
    if axis not in range(4):
        raise InvalidInputError(f"axis must be 0..3, got {axis}")

    grid = f.grid
    h = grid.h
    values = f.values
    mask = np.ascontiguousarray(grid.mask)

    ahead = _shift(mask, axis, 1)
    behind = _shift(mask, axis, -1)
    central = ahead & behind
    forward = ~central & ahead & _shift(mask, axis, 2)
    backward = ~central & ~forward & behind & _shift(mask, axis, -2)
    first_forward = ~central & ~forward & ~backward & ahead
    first_backward = ~central & ~forward & ~backward & ~ahead & behind

    f_next = _shift(values, axis, 1)
    f_prev = _shift(values, axis, -1)

    result = np.zeros_like(values)
    result = np.where(central, (f_next - f_prev) / (2.0 * h), result)
    if forward.any():
        result = np.where(forward, (-3.0 * values + 4.0 * f_next - _shift(values, axis, 2)) / (2.0 * h),
                          result)
    if backward.any():
        result = np.where(backward, (3.0 * values - 4.0 * f_prev + _shift(values, axis, -2)) / (2.0 * h),
                          result)
    if first_forward.any() or first_backward.any():
        result = np.where(first_forward, (f_next - values) / h, result)
        result = np.where(first_backward, (values - f_prev) / h, result)
    return ScalarField(grid, result)


def wirtinger(f: ScalarField, which: str) -> ScalarField:
    """d/dv, d/dvbar, d/dw or d/dwbar with v = x1 + i x2, w = x3 + i x4"""
    if which not in WIRTINGER:
        raise InvalidInputError(f"unknown Wirtinger derivative '{which}'")
    real_axis = 0 if which in ('v', 'vbar') else 2
    sign = -1.0 if which in ('v', 'w') else 1.0
    d_real = partial_derivative(f, real_axis).values
    d_imag = partial_derivative(f, real_axis + 1).values
    return ScalarField(f.grid, 0.5 * (d_real + sign * 1j * d_imag))


def to_frame(f: OneForm) -> OneForm:
    """Coordinate coefficients c -> frame coefficients conj(beta) c"""
    if f.representation == FRAME:
        return f
    frame = grid_frame(f.grid)
    c1, c2 = f.coefficients
    first = np.conj(frame.beta(1, 1)) * c1 + np.conj(frame.beta(1, 2)) * c2
    second = np.conj(frame.beta(2, 1)) * c1 + np.conj(frame.beta(2, 2)) * c2
    return OneForm(f.grid, first, second, FRAME)


def to_coordinate(f: OneForm) -> OneForm:
    """Frame coefficients phi -> coordinate coefficients alpha^* phi"""
    if f.representation == COORDINATE:
        return f
    frame = grid_frame(f.grid)
    phi1, phi2 = f.coefficients
    first = np.conj(frame.alpha(1, 1)) * phi1 + np.conj(frame.alpha(2, 1)) * phi2
    second = np.conj(frame.alpha(1, 2)) * phi1 + np.conj(frame.alpha(2, 2)) * phi2
    return OneForm(f.grid, first, second, COORDINATE)


def bump(grid: Grid, center: np.ndarray, radius: float) -> np.ndarray:
    """exp(-1 / (1 - |x - c|^2 / r^2)) inside the ball, zero outside"""
    s = sum((grid.coordinate(axis) - center[axis]) ** 2 for axis in range(4)) / radius ** 2
    inside = s < 1.0
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        profile = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - s, 1.0)), 0.0)
    return np.broadcast_to(profile, grid.shape)


def monomial_exponents(degree: int):
    """(a, b, c, d) for v^a w^b vbar^c wbar^d with a + b + c + d <= degree"""
    return [e for e in product(range(degree + 1), repeat=4) if sum(e) <= degree]


def random_polynomial(grid: Grid, degree: int, rng: np.random.Generator) -> np.ndarray:
    v, w = grid.v, grid.w
    exponents = monomial_exponents(degree)
    coefficients = rng.standard_normal(len(exponents)) + 1j * rng.standard_normal(len(exponents))
    total = np.zeros(grid.shape, dtype=np.complex128)
    for coefficient, (a, b, c, d) in zip(coefficients, exponents):
        total = total + coefficient * (v ** a) * (w ** b) * (np.conj(v) ** c) * (np.conj(w) ** d)
    return total


def make_test_form(spec: TestFormSpec, grid: Grid = None) -> OneForm:
    """
    Seeded smooth compactly supported (0,1)-form in the frame representation

    Each coefficient is a random polynomial in v, w, vbar, wbar times gamma^m times
    a bump of the given support radius.

    Args:
        spec: Form parameters
        grid: Sampling grid (a window fitted to the support at the default n when omitted)

    Raises:
        InvalidInputError: when the support ball is not inside B
    """
    if spec.support_radius <= 0:
        raise InvalidInputError(f"support radius must be positive, got {spec.support_radius}")
    if spec.vanishing_order < 0 or spec.polynomial_degree < 0:
        raise InvalidInputError("vanishing order and polynomial degree must be nonnegative")
    # |v| <= |c_v| + r and |w| <= |c_w| + r on the ball
    if spec.quartic_bound >= 1.0:
        raise InvalidInputError(f"support ball of {spec.label} leaves B "
                                f"((|c_v| + r)^4 + (|c_w| + r)^4 = {spec.quartic_bound:.4g})")

    if grid is None:
        grid = Grid.for_support(config.grid.n, spec.center, spec.support_radius,
                                config.grid.window_margin_cells)

    rng = np.random.Generator(np.random.Philox(spec.seed))
    envelope = bump(grid, spec.center.real_coordinates, spec.support_radius)
    if spec.vanishing_order:
        envelope = envelope * grid.gamma ** spec.vanishing_order
    first = random_polynomial(grid, spec.polynomial_degree, rng) * envelope
    second = random_polynomial(grid, spec.polynomial_degree, rng) * envelope

    logger.debug(f"Generated test form {spec.label} on n={grid.n}, L={grid.half_width:.4g}")
    return OneForm(grid, first, second, FRAME)


def mollifier_kernel(grid: Grid, eps: float) -> np.ndarray:
    """Discrete chi_eps on an odd stencil, normalized so that sum * h^4 = 1"""
    if eps < 2.0 * grid.h:
        raise UnderResolvedError(f"mollifier radius {eps:g} below 2h = {2.0 * grid.h:.4g}")
    half = int(math.ceil(eps / grid.h))
    offsets = np.arange(-half, half + 1) * grid.h
    axes = np.meshgrid(offsets, offsets, offsets, offsets, indexing='ij', sparse=True)
    s = sum(axis ** 2 for axis in axes) / eps ** 2
    inside = s < 1.0
    kernel = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - s, 1.0)), 0.0)
    return kernel / (kernel.sum() * grid.cell_volume)


def mollify(f: Union[ScalarField, OneForm], eps: float) -> Union[ScalarField, OneForm]:
    """
    Convolution with chi_eps (x) = eps^{-4} chi(x / eps)

    Raises:
        UnderResolvedError: when eps < 2h
    """
    kernel = mollifier_kernel(f.grid, eps) * f.grid.cell_volume
    footprint = (kernel > 0).astype(float)
    # exact zeros outside the dilated support; the FFT leaves round-off there
    reach = fftconvolve(f.support.astype(float), footprint, mode='same') > 0.5

    def smooth(values: np.ndarray) -> np.ndarray:
        # real transforms on each part
        smoothed = (fftconvolve(values.real, kernel, mode='same')
                    + 1j * fftconvolve(values.imag, kernel, mode='same'))
        return np.where(reach, smoothed, 0.0)

    if isinstance(f, OneForm):
        return OneForm(f.grid, smooth(f.first), smooth(f.second), f.representation)
    return ScalarField(f.grid, smooth(f.values))
