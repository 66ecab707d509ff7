"""
Sampled-field data models on cell-centred 4-D grids
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Any, Tuple, Union

import numpy as np

from .geometry_data import Point
from ..exceptions import InvalidInputError

COORDINATE = "coordinate"
FRAME = "frame"


@dataclass(frozen=True)
class Grid:
    """Cell-centred grid on [-L, L]^4 with the membership mask of B"""
    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidInputError(f"grid size must be an even integer >= 4, got {self.n}")
        if self.half_width <= 0:
            raise InvalidInputError(f"grid half width must be positive, got {self.half_width}")

    @classmethod
    def for_support(cls, n: int, center: Point, radius: float, margin_cells: int = 6) -> 'Grid':
        """Origin-centred window covering a support ball plus a margin of grid cells"""
        reach = float(np.max(np.abs(center.real_coordinates))) + radius
        # half_width = reach + margin_cells * h with h = 2 * half_width / n
        half_width = reach / (1.0 - 2.0 * margin_cells / n) if n > 2 * margin_cells else 2.0 * reach
        return cls(n=n, half_width=half_width)

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.n,) * 4

    @property
    def cell_volume(self) -> float:
        return self.h ** 4

    @cached_property
    def axis(self) -> np.ndarray:
        """Cell centres: odd multiples of h/2, never zero"""
        return -self.half_width + (np.arange(self.n) + 0.5) * self.h

    def coordinate(self, index: int) -> np.ndarray:
        """Open-grid real coordinate x_{index+1}, broadcastable to the grid shape"""
        shape = [1, 1, 1, 1]
        shape[index] = self.n
        return self.axis.reshape(shape)

    @cached_property
    def v(self) -> np.ndarray:
        return self.coordinate(0) + 1j * self.coordinate(1)

    @cached_property
    def w(self) -> np.ndarray:
        return self.coordinate(2) + 1j * self.coordinate(3)

    @cached_property
    def abs_v2(self) -> np.ndarray:
        return np.abs(self.v) ** 2

    @cached_property
    def abs_w2(self) -> np.ndarray:
        return np.abs(self.w) ** 2

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.sqrt(self.abs_v2 + self.abs_w2)

    @cached_property
    def det_g(self) -> np.ndarray:
        a, b = self.abs_v2, self.abs_w2
        return 16.0 * a * b + 4.0 * a * a + 4.0 * b * b

    @cached_property
    def mask(self) -> np.ndarray:
        inside = self.abs_v2 ** 2 + self.abs_w2 ** 2 < 1.0
        return np.broadcast_to(inside, self.shape)

    @property
    def masked_points(self) -> int:
        return int(np.count_nonzero(self.mask))

    def clears_boundary(self, support: np.ndarray, cells: int) -> bool:
        """True when a support set stays at least `cells` cells away from the mask and window edges"""
        grown = np.asarray(support, dtype=bool).copy()
        for _ in range(cells):
            grown = _dilate(grown)
        return not (np.any(grown & ~self.mask) or _touches_window_edge(grown))

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'h': self.h, 'half_width': self.half_width}


def _touches_window_edge(support: np.ndarray) -> bool:
    for axis in range(support.ndim):
        first = np.take(support, 0, axis=axis)
        last = np.take(support, -1, axis=axis)
        if first.any() or last.any():
            return True
    return False


def _dilate(support: np.ndarray) -> np.ndarray:
    grown = support.copy()
    for axis in range(support.ndim):
        forward = [slice(None)] * support.ndim
        backward = [slice(None)] * support.ndim
        forward[axis] = slice(1, None)
        backward[axis] = slice(None, -1)
        grown[tuple(backward)] |= support[tuple(forward)]
        grown[tuple(forward)] |= support[tuple(backward)]
    return grown


def _freeze(values: np.ndarray, grid: Grid) -> np.ndarray:
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != grid.shape:
        values = np.broadcast_to(values, grid.shape)
    frozen = np.where(grid.mask, values, 0.0 + 0.0j)
    frozen.flags.writeable = False
    return frozen


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples on a grid, zero outside the mask"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _freeze(self.values, self.grid))

    @classmethod
    def zeros(cls, grid: Grid) -> 'ScalarField':
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def _other_values(self, other):
        if isinstance(other, ScalarField):
            return other.values
        return other

    def __add__(self, other) -> 'ScalarField':
        return ScalarField(self.grid, self.values + self._other_values(other))

    def __sub__(self, other) -> 'ScalarField':
        return ScalarField(self.grid, self.values - self._other_values(other))

    def __mul__(self, other) -> 'ScalarField':
        return ScalarField(self.grid, self.values * self._other_values(other))

    __rmul__ = __mul__

    def __neg__(self) -> 'ScalarField':
        return ScalarField(self.grid, -self.values)

    def conj(self) -> 'ScalarField':
        return ScalarField(self.grid, np.conj(self.values))

    @property
    def support(self) -> np.ndarray:
        return self.values != 0

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class OneForm:
    """(0,1)-form: two coefficient arrays in the coordinate or frame representation"""
    grid: Grid
    first: np.ndarray
    second: np.ndarray
    representation: str = FRAME

    def __post_init__(self):
        if self.representation not in (COORDINATE, FRAME):
            raise InvalidInputError(f"unknown representation '{self.representation}'")
        object.__setattr__(self, 'first', _freeze(self.first, self.grid))
        object.__setattr__(self, 'second', _freeze(self.second, self.grid))

    @classmethod
    def zeros(cls, grid: Grid, representation: str = FRAME) -> 'OneForm':
        zero = np.zeros(grid.shape, dtype=np.complex128)
        return cls(grid, zero, zero, representation)

    @property
    def coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.first, self.second

    def component(self, index: int) -> ScalarField:
        """Coefficient 1 or 2 as a ScalarField"""
        return ScalarField(self.grid, self.first if index == 1 else self.second)

    def scaled(self, factor: Union[complex, np.ndarray]) -> 'OneForm':
        return OneForm(self.grid, self.first * factor, self.second * factor, self.representation)

    def __add__(self, other: 'OneForm') -> 'OneForm':
        if other.representation != self.representation:
            raise InvalidInputError("cannot add forms in different representations")
        return OneForm(self.grid, self.first + other.first, self.second + other.second,
                       self.representation)

    def __sub__(self, other: 'OneForm') -> 'OneForm':
        return self + other.scaled(-1.0)

    @property
    def pointwise_abs2(self) -> np.ndarray:
        return np.abs(self.first) ** 2 + np.abs(self.second) ** 2

    @property
    def support(self) -> np.ndarray:
        return (self.first != 0) | (self.second != 0)

    def max_abs(self) -> float:
        return float(np.max(np.sqrt(self.pointwise_abs2)))


@dataclass(frozen=True)
class TestFormSpec:
    """Parameters of one generated test form"""
    __test__ = False  # not a pytest class

    center: Point
    support_radius: float
    vanishing_order: int
    polynomial_degree: int
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'center': self.center.to_dict(),
            'support_radius': self.support_radius,
            'vanishing_order': self.vanishing_order,
            'polynomial_degree': self.polynomial_degree,
            'seed': self.seed,
        }

    @property
    def label(self) -> str:
        return (f"seed={self.seed} r={self.support_radius:g} m={self.vanishing_order} "
                f"deg={self.polynomial_degree}")

    @property
    def quartic_bound(self) -> float:
        """Upper bound of |v|^4 + |w|^4 over the support ball"""
        r = self.support_radius
        return (abs(self.center.v) + r) ** 4 + (abs(self.center.w) + r) ** 4
