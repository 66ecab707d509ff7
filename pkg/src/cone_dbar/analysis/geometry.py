"""
Pointwise geometry of the cone pulled back to B: covering map, metric, frame and xi-order checks
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Optional
import logging

import numpy as np
from sklearn.linear_model import LinearRegression

from ..models.geometry_data import Point, MetricData, Frame, OrderReport
from ..models.field_data import Grid
from ..exceptions import DegenerateMetricError, InvalidInputError
from ..config.settings import config

logger = logging.getLogger(__name__)


def covering_map(p: Point) -> Tuple[complex, complex, complex]:
    """(v, w) -> (v^2, w^2, v w); the image lies on z3^2 = z1 z2"""
    return p.v * p.v, p.w * p.w, p.v * p.w


def metric_matrix(v: complex, w: complex) -> np.ndarray:
    a, b = abs(v) ** 2, abs(w) ** 2
    return np.array([[4.0 * a + b, v * np.conj(w)],
                     [np.conj(v) * w, a + 4.0 * b]], dtype=np.complex128)


def closed_form_det(v, w):
    """|g| = 16|v|^2|w|^2 + 4|v|^4 + 4|w|^4"""
    a, b = np.abs(v) ** 2, np.abs(w) ** 2
    return 16.0 * a * b + 4.0 * a * a + 4.0 * b * b


def metric_at(p: Point) -> MetricData:
    """Metric data at a point; g_inv is absent at the origin"""
    g = metric_matrix(p.v, p.w)
    det_g = float(closed_form_det(p.v, p.w))
    g_inv = None
    if det_g > 0:
        a, b = abs(p.v) ** 2, abs(p.w) ** 2
        g_inv = np.array([[a + 4.0 * b, -p.v * np.conj(p.w)],
                          [-np.conj(p.v) * p.w, 4.0 * a + b]], dtype=np.complex128) / det_g
    return MetricData(g=g, det_g=det_g, gamma=p.gamma, _g_inv=g_inv)


def frame_at(p: Point) -> Frame:
    """
    Orthonormal frame from the Cholesky factor of g

    alpha = L^* with g = L L^* (L lower triangular, positive diagonal),
    so alpha^* alpha = g, and beta = (alpha^T)^{-1}.

    Raises:
        DegenerateMetricError: at the origin
    """
    data = metric_at(p)
    if not data.det_g > 0:
        raise DegenerateMetricError("no orthonormal frame at the origin")
    lower = np.linalg.cholesky(data.g)
    alpha = lower.conj().T
    beta = np.linalg.inv(alpha.T)
    return Frame(alpha=alpha, beta=beta)


@dataclass(frozen=True, eq=False)
class FrameField:
    """
    Cholesky frame on arrays of points, stored through its three nonzero factor entries

    alpha = [[l11, conj(l21)], [0, l22]],
    beta  = [[1/l11, 0], [-conj(l21)/(l11 l22), 1/l22]].
    """
    l11: np.ndarray
    l21: np.ndarray
    l22: np.ndarray

    @classmethod
    def from_coordinates(cls, v: np.ndarray, w: np.ndarray) -> 'FrameField':
        a, b = np.abs(v) ** 2, np.abs(w) ** 2
        g11 = 4.0 * a + b
        l11 = np.sqrt(g11)
        l21 = np.conj(v) * w / l11
        l22 = np.sqrt(closed_form_det(v, w) / g11)
        return cls(l11=l11, l21=l21, l22=l22)

    def alpha(self, i: int, j: int):
        if (i, j) == (1, 1):
            return self.l11
        if (i, j) == (1, 2):
            return np.conj(self.l21)
        if (i, j) == (2, 1):
            return 0.0
        return self.l22

    def beta(self, i: int, j: int):
        if (i, j) == (1, 1):
            return 1.0 / self.l11
        if (i, j) == (1, 2):
            return 0.0
        if (i, j) == (2, 1):
            return -np.conj(self.l21) / (self.l11 * self.l22)
        return 1.0 / self.l22

    @property
    def det_alpha(self) -> np.ndarray:
        """Real and positive; |det alpha|^2 = |g|"""
        return self.l11 * self.l22

    def alpha_matrix(self) -> np.ndarray:
        """Stacked (..., 2, 2) alpha"""
        return _stack(self.alpha, self.l11.shape)

    def beta_matrix(self) -> np.ndarray:
        return _stack(self.beta, self.l11.shape)


def _stack(entry, shape) -> np.ndarray:
    out = np.zeros(shape + (2, 2), dtype=np.complex128)
    for i in (1, 2):
        for j in (1, 2):
            out[..., i - 1, j - 1] = entry(i, j)
    return out


@lru_cache(maxsize=4)
def grid_frame(grid: Grid) -> FrameField:
    """Frame entries on every grid point (the cell-centred grid never hits the origin)"""
    logger.debug(f"Building frame arrays for n={grid.n}, L={grid.half_width:.4g}")
    v = np.broadcast_to(grid.v, grid.shape)
    w = np.broadcast_to(grid.w, grid.shape)
    return FrameField.from_coordinates(v, w)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_interior_points(count: int, seed: int, min_gamma: float = 0.0) -> np.ndarray:
    """Seeded uniform samples of B as an array of shape (count, 4)"""
    rng = _generator(seed)
    accepted: List[np.ndarray] = []
    total = 0
    while total < count:
        batch = rng.uniform(-1.0, 1.0, size=(2 * count, 4))
        v2 = batch[:, 0] ** 2 + batch[:, 1] ** 2
        w2 = batch[:, 2] ** 2 + batch[:, 3] ** 2
        keep = (v2 ** 2 + w2 ** 2 < 1.0) & (np.sqrt(v2 + w2) > min_gamma)
        accepted.append(batch[keep])
        total += int(np.count_nonzero(keep))
    return np.concatenate(accepted)[:count]


def unit_annulus_samples(count: int, seed: int) -> np.ndarray:
    """Seeded points with gamma uniform in [1/2, 1], shape (count, 4)"""
    rng = _generator(seed)
    directions = rng.standard_normal(size=(count, 4))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(0.5, 1.0, size=(count, 1))
    return directions * radii


def sample_annulus(level: int, count: int, seed: int) -> np.ndarray:
    """Points with gamma in [2^{-level-1}, 2^{-level}]"""
    return unit_annulus_samples(count, seed) * 2.0 ** (-level)


def dyadic_levels(gamma: np.ndarray) -> np.ndarray:
    """j with gamma in [2^{-j-1}, 2^{-j})"""
    return np.floor(-np.log2(gamma)).astype(int)


def verify_xi_order(samples: Sequence[Tuple[Point, complex]], k: float,
                    bound: Optional[float] = None) -> OrderReport:
    """
    Annulus maxima of gamma^{-k} |value| for a claimed xi_k quantity

    Args:
        samples: (point, value) pairs away from the origin
        k: Claimed order
        bound: Uniform bound the maxima must respect (spread check when omitted)

    Returns:
        OrderReport with one entry per populated dyadic annulus
    """
    if not samples:
        raise InvalidInputError("verify_xi_order needs at least one sample")
    gamma = np.array([p.gamma for p, _ in samples])
    values = np.array([value for _, value in samples], dtype=np.complex128)
    return verify_xi_order_arrays(gamma, values, k, bound)


def verify_xi_order_arrays(gamma: np.ndarray, values: np.ndarray, k: float,
                           bound: Optional[float] = None) -> OrderReport:
    """Array form of verify_xi_order"""
    gamma = np.asarray(gamma, dtype=float).ravel()
    values = np.asarray(values).ravel()
    if gamma.size == 0:
        raise InvalidInputError("verify_xi_order needs at least one sample")
    if np.any(gamma <= 0):
        raise InvalidInputError("xi-order samples must avoid the origin")

    scaled = gamma ** (-k) * np.abs(values)
    levels = dyadic_levels(gamma)
    annulus_levels, maxima, counts = [], [], []
    for level in np.unique(levels):
        selected = levels == level
        annulus_levels.append(int(level))
        maxima.append(float(np.max(scaled[selected])))
        counts.append(int(np.count_nonzero(selected)))

    report = OrderReport(k=k, annulus_levels=annulus_levels, annulus_maxima=maxima,
                         annulus_counts=counts, overall_max=float(np.max(scaled)), bound=bound)
    if bound is not None:
        report.passes = bool(report.overall_max <= bound)
    else:
        report.passes = bool(np.isfinite(report.overall_max)
                             and report.spread <= config.geometry.xi_annulus_spread)
    logger.debug(f"xi_{k} check over {len(annulus_levels)} annuli: max={report.overall_max:.4g} "
                 f"spread={report.spread:.3g}")
    return report


def fit_growth_exponent(gamma: np.ndarray, magnitude: np.ndarray) -> float:
    """Least-squares slope of log(magnitude) against log(gamma)"""
    x = np.log(np.asarray(gamma, dtype=float)).reshape(-1, 1)
    y = np.log(np.asarray(magnitude, dtype=float))
    model = LinearRegression().fit(x, y)
    return float(model.coef_[0])


def frame_growth_exponents(count: int, seed: int, levels: Sequence[int] = None) -> Dict[str, float]:
    """
    Fitted exponents of max|alpha| and max|beta| over dyadic annuli

    The same seeded point set is rescaled into every annulus.
    """
    if levels is None:
        levels = range(1, config.geometry.annulus_levels + 1)
    base = unit_annulus_samples(count, seed)
    annulus_gamma, alpha_max, beta_max = [], [], []
    for level in levels:
        points = base * 2.0 ** (-level)
        v = points[:, 0] + 1j * points[:, 1]
        w = points[:, 2] + 1j * points[:, 3]
        frame = FrameField.from_coordinates(v, w)
        annulus_gamma.append(float(np.max(np.sqrt(np.abs(v) ** 2 + np.abs(w) ** 2))))
        alpha_max.append(float(np.max(np.abs(frame.alpha_matrix()))))
        beta_max.append(float(np.max(np.abs(frame.beta_matrix()))))
    return {
        'alpha_slope': fit_growth_exponent(annulus_gamma, alpha_max),
        'beta_slope': fit_growth_exponent(annulus_gamma, beta_max),
    }


def _shifted_frames(points: np.ndarray, step: np.ndarray) -> Dict[Tuple[int, int], FrameField]:
    """Frames at points +/- step along each real axis, keyed by (axis, sign)"""
    frames = {}
    for axis in range(4):
        for sign in (1, -1):
            shifted = points.copy()
            shifted[:, axis] += sign * step
            v = shifted[:, 0] + 1j * shifted[:, 1]
            w = shifted[:, 2] + 1j * shifted[:, 3]
            frames[(axis, sign)] = FrameField.from_coordinates(v, w)
    return frames


def _wirtinger_pointwise(entry, frames, step) -> Dict[str, np.ndarray]:
    """d/dv, d/dw, d/dvbar, d/dwbar of one frame-derived quantity by centred differences"""
    partial = []
    for axis in range(4):
        forward = np.asarray(entry(frames[(axis, 1)]), dtype=np.complex128)
        backward = np.asarray(entry(frames[(axis, -1)]), dtype=np.complex128)
        partial.append((forward - backward) / (2.0 * step))
    return {
        'v': 0.5 * (partial[0] - 1j * partial[1]),
        'vbar': 0.5 * (partial[0] + 1j * partial[1]),
        'w': 0.5 * (partial[2] - 1j * partial[3]),
        'wbar': 0.5 * (partial[2] + 1j * partial[3]),
    }


def structure_coefficients_at(points: np.ndarray, relative_step: float = None) -> Dict[str, object]:
    """
    xi_{-2} structure coefficients at an array of points of shape (N, 4)

    Returns:
        'dbar': (2, N) b_i with dbar(omegabar_i) = b_i omegabar_1 ^ omegabar_2
        'star': (2, N) s_i = |g|^{-1} sum_m d_m(|g| beta_im), so that
                dbar* f = -(L_1 f_1 + L_2 f_2) - (s_1 f_1 + s_2 f_2)
        'commutator': {(j, k): (4, N)} coefficients (c_1, c_2, d_1, d_2) with
                [L_j, Lbar_k] = c_1 L_1 + c_2 L_2 + d_1 Lbar_1 + d_2 Lbar_2
        'gamma': (N,)
    """
    if relative_step is None:
        relative_step = config.geometry.fd_relative_step
    points = np.asarray(points, dtype=float)
    v = points[:, 0] + 1j * points[:, 1]
    w = points[:, 2] + 1j * points[:, 3]
    gamma = np.sqrt(np.abs(v) ** 2 + np.abs(w) ** 2)
    if np.any(gamma <= 0):
        raise DegenerateMetricError("structure coefficients are undefined at the origin")

    step = relative_step * gamma
    frames = _shifted_frames(points, step)
    centre = FrameField.from_coordinates(v, w)
    det_g = closed_form_det(v, w)
    derivative = lambda entry: _wirtinger_pointwise(entry, frames, step)

    dbar = np.zeros((2, len(gamma)), dtype=np.complex128)
    star = np.zeros((2, len(gamma)), dtype=np.complex128)
    for i in (1, 2):
        d_alpha_i2 = derivative(lambda fr, i=i: fr.alpha(i, 2) * np.ones_like(fr.l11))
        d_alpha_i1 = derivative(lambda fr, i=i: fr.alpha(i, 1) * np.ones_like(fr.l11))
        # d/dvbar conj(a) = conj(d/dv a)
        dbar[i - 1] = (np.conj(d_alpha_i2['v']) - np.conj(d_alpha_i1['w'])) / centre.det_alpha

        weighted_1 = derivative(lambda fr, i=i: (fr.det_alpha ** 2) * fr.beta(i, 1))
        weighted_2 = derivative(lambda fr, i=i: (fr.det_alpha ** 2) * fr.beta(i, 2))
        star[i - 1] = (weighted_1['v'] + weighted_2['w']) / det_g

    beta_derivatives = {}
    for j in (1, 2):
        for m in (1, 2):
            beta_derivatives[(j, m)] = derivative(
                lambda fr, j=j, m=m: fr.beta(j, m) * np.ones_like(fr.l11))

    commutator = {}
    for j in (1, 2):
        for k in (1, 2):
            coefficients = np.zeros((4, len(gamma)), dtype=np.complex128)
            for i in (1, 2):
                c_i = 0.0
                d_i = 0.0
                for m in (1, 2):
                    # Lbar_k beta_jm and L_j conj(beta_km)
                    lbar_beta = sum(np.conj(centre.beta(k, n)) * beta_derivatives[(j, m)][bar]
                                    for n, bar in ((1, 'vbar'), (2, 'wbar')))
                    l_conj_beta = sum(centre.beta(j, n) * np.conj(beta_derivatives[(k, m)][bar])
                                      for n, bar in ((1, 'vbar'), (2, 'wbar')))
                    c_i = c_i - lbar_beta * centre.alpha(i, m)
                    d_i = d_i + l_conj_beta * np.conj(centre.alpha(i, m))
                coefficients[i - 1] = c_i
                coefficients[i + 1] = d_i
            commutator[(j, k)] = coefficients

    return {'dbar': dbar, 'star': star, 'commutator': commutator, 'gamma': gamma}
