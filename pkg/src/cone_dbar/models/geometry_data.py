"""
Pointwise geometry data models
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Any
import math

import numpy as np

from ..exceptions import DegenerateMetricError


@dataclass(frozen=True)
class Point:
    """A location (v, w) in C^2"""
    v: complex
    w: complex

    @property
    def gamma(self) -> float:
        return math.sqrt(abs(self.v) ** 2 + abs(self.w) ** 2)

    @property
    def is_interior(self) -> bool:
        """Membership in B = {|v|^4 + |w|^4 < 1}"""
        return abs(self.v) ** 4 + abs(self.w) ** 4 < 1.0

    @property
    def real_coordinates(self) -> np.ndarray:
        """(x1, x2, x3, x4) with v = x1 + i x2, w = x3 + i x4"""
        return np.array([self.v.real, self.v.imag, self.w.real, self.w.imag])

    @classmethod
    def from_real(cls, x) -> 'Point':
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def to_dict(self) -> Dict[str, Any]:
        return {'v': [self.v.real, self.v.imag], 'w': [self.w.real, self.w.imag]}


@dataclass
class MetricData:
    """The metric g, its determinant, inverse and gamma at one point"""
    g: np.ndarray
    det_g: float
    gamma: float
    _g_inv: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def g_inv(self) -> np.ndarray:
        if self._g_inv is None:
            raise DegenerateMetricError("g_inv requested where det(g) = 0 (the origin)")
        return self._g_inv

    @property
    def has_inverse(self) -> bool:
        return self._g_inv is not None

    @property
    def direct_det(self) -> float:
        return float((self.g[0, 0] * self.g[1, 1] - self.g[0, 1] * self.g[1, 0]).real)


@dataclass
class Frame:
    """Orthonormal (1,0)-forms (rows of alpha) and dual fields (rows of beta)"""
    alpha: np.ndarray
    beta: np.ndarray
    gauge: str = "cholesky-positive-diagonal"

    def duality_error(self) -> float:
        """max |alpha beta^T - I|"""
        return float(np.max(np.abs(self.alpha @ self.beta.T - np.eye(2))))

    def orthonormality_error(self, g_inv: np.ndarray) -> float:
        """max |alpha g_inv alpha^* - I|"""
        return float(np.max(np.abs(self.alpha @ g_inv @ self.alpha.conj().T - np.eye(2))))


@dataclass
class OrderReport:
    """Annulus maxima of gamma^{-k} |value| for a xi_k claim"""
    k: float
    annulus_levels: List[int]
    annulus_maxima: List[float]
    annulus_counts: List[int]
    overall_max: float
    bound: Optional[float] = None
    passes: Optional[bool] = None

    @property
    def spread(self) -> float:
        """Ratio of the largest to the smallest nonzero annulus maximum"""
        positive = [m for m, c in zip(self.annulus_maxima, self.annulus_counts) if c and m > 0]
        if not positive:
            return 1.0
        return max(positive) / min(positive)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'annulus_levels': list(self.annulus_levels),
            'annulus_maxima': [float(m) for m in self.annulus_maxima],
            'annulus_counts': list(self.annulus_counts),
            'overall_max': float(self.overall_max),
            'bound': self.bound,
            'spread': float(self.spread),
            'passes': self.passes,
        }
