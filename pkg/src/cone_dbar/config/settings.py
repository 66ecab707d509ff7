"""
Configuration settings for the verification harness
"""

from dataclasses import dataclass, field, fields
from typing import Dict, List, Callable, Any
import logging

from ..exceptions import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class GeometryConfig:
    """Pointwise geometry tolerances"""
    det_rtol: float = 1e-12          # closed-form |g| vs direct determinant
    inverse_tol: float = 1e-10       # ||g g_inv - I||_max where gamma > inverse_min_gamma
    inverse_min_gamma: float = 0.1
    frame_tol: float = 1e-10         # duality / orthonormality
    frame_min_gamma: float = 1e-6
    slope_tol: float = 0.05          # growth exponent fits
    annulus_levels: int = 8          # dyadic annuli j = 1..annulus_levels
    residual_levels: int = 6         # grid remainders, one window per annulus
    annulus_n: int = 24
    fd_relative_step: float = 1e-4   # step = fd_relative_step * gamma(p)
    xi_annulus_spread: float = 4.0   # max/min of annulus maxima
    structure_rtol: float = 0.1      # grid residuals vs pointwise structure coefficients
    commutator_rtol: float = 0.25    # grid commutator expansion vs pointwise coefficients
    n_random_points: int = 10000


@dataclass
class GridConfig:
    """Discretization of B"""
    n: int = 32
    refinement_n: int = 48
    half_width: float = 1.05
    window_margin_cells: int = 6


@dataclass
class NormConfig:
    """Quadrature and spectral norm settings"""
    pad_factor: int = 2
    wraparound_cells: int = 4
    max_sobolev_order: int = 2
    support_threshold: float = 1e-12
    lstsq_regularization: float = 1e-12
    divergence_check_annuli: int = 3
    quadrature_rtol: float = 0.02    # grid volume of X vs the closed form
    parseval_rtol: float = 0.02
    gaussian_rtol: float = 0.01


@dataclass
class HarnessConfig:
    """Sweep, study and output configuration"""
    seed: int = 20240607
    n_forms: int = 100
    radii: List[float] = None
    vanishing_order: int = 2
    poly_degree: int = 2
    epsilon_list: List[float] = None
    p_list: List[float] = None
    friedrichs_eps: List[float] = None
    friedrichs_n: int = 48
    friedrichs_fields: int = 5
    friedrichs_radius: float = 0.5
    n_pairs: int = 20
    adjoint_n: List[int] = None
    holder_forms: int = 50

    # Verdict tolerances
    stability_tol: float = 0.25
    trend_tol: float = 0.25
    friedrichs_step_tol: float = 0.10
    friedrichs_min_order: float = 1.0    # final/initial <= (eps_last / eps_first)^order
    adjoint_floor: float = 1e-10
    ddbar_rtol: float = 1e-12

    workers: int = 1

    # File paths
    out_dir: str = "reports"
    logs_dir: str = "logs"

    def __post_init__(self):
        if self.radii is None:
            self.radii = [2.0 ** -j for j in range(1, 6)]
        if self.epsilon_list is None:
            self.epsilon_list = [0.25, 0.5, 1.0]
        if self.p_list is None:
            self.p_list = [3.0, 4.0, 8.0]
        if self.friedrichs_eps is None:
            self.friedrichs_eps = [0.2, 0.1, 0.05, 0.025]
        if self.adjoint_n is None:
            self.adjoint_n = [16, 24]


@dataclass
class SystemConfig:
    """Overall system configuration"""
    geometry: GeometryConfig = None
    grid: GridConfig = None
    norms: NormConfig = None
    harness: HarnessConfig = None

    # Logging
    log_level: str = "INFO"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    def __post_init__(self):
        if self.geometry is None:
            self.geometry = GeometryConfig()
        if self.grid is None:
            self.grid = GridConfig()
        if self.norms is None:
            self.norms = NormConfig()
        if self.harness is None:
            self.harness = HarnessConfig()

    def to_dict(self) -> Dict[str, Any]:
        """Flatten into a JSON-friendly dictionary"""
        result = {'log_level': self.log_level}
        for group in ('geometry', 'grid', 'norms', 'harness'):
            section = getattr(self, group)
            result[group] = {f.name: getattr(section, f.name) for f in fields(section)}
        return result


def _float_list(text: str) -> List[float]:
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(item) for item in items]


def _int_list(text: str) -> List[int]:
    return [int(value) for value in _float_list(text)]


def _tolerances(text: str) -> Dict[str, float]:
    result = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition(':')
        if not sep:
            raise ValueError(f"expected name:value, got '{item}'")
        result[name.strip()] = float(value)
    return result


# key -> (group, attribute, parser)
_FILE_KEYS: Dict[str, tuple] = {
    'n': ('grid', 'n', int),
    'refinement_n': ('grid', 'refinement_n', int),
    'half_width': ('grid', 'half_width', float),
    'pad_factor': ('norms', 'pad_factor', int),
    'seed': ('harness', 'seed', int),
    'n_forms': ('harness', 'n_forms', int),
    'radii': ('harness', 'radii', _float_list),
    'vanishing_order': ('harness', 'vanishing_order', int),
    'poly_degree': ('harness', 'poly_degree', int),
    'epsilon_list': ('harness', 'epsilon_list', _float_list),
    'p_list': ('harness', 'p_list', _float_list),
    'friedrichs_eps': ('harness', 'friedrichs_eps', _float_list),
    'friedrichs_n': ('harness', 'friedrichs_n', int),
    'friedrichs_radius': ('harness', 'friedrichs_radius', float),
    'n_pairs': ('harness', 'n_pairs', int),
    'holder_forms': ('harness', 'holder_forms', int),
    'adjoint_n': ('harness', 'adjoint_n', _int_list),
    'workers': ('harness', 'workers', int),
    'log_level': (None, 'log_level', str),
}

# tolerance name -> (group, attribute)
_TOLERANCE_KEYS: Dict[str, tuple] = {
    'stability': ('harness', 'stability_tol'),
    'trend': ('harness', 'trend_tol'),
    'friedrichs_step': ('harness', 'friedrichs_step_tol'),
    'friedrichs_order': ('harness', 'friedrichs_min_order'),
    'adjoint_floor': ('harness', 'adjoint_floor'),
    'ddbar': ('harness', 'ddbar_rtol'),
    'det': ('geometry', 'det_rtol'),
    'inverse': ('geometry', 'inverse_tol'),
    'frame': ('geometry', 'frame_tol'),
    'slope': ('geometry', 'slope_tol'),
    'xi_spread': ('geometry', 'xi_annulus_spread'),
    'structure': ('geometry', 'structure_rtol'),
    'commutator': ('geometry', 'commutator_rtol'),
    'quadrature': ('norms', 'quadrature_rtol'),
    'parseval': ('norms', 'parseval_rtol'),
    'gaussian': ('norms', 'gaussian_rtol'),
}


def _apply(target: SystemConfig, group: str, attribute: str, value: Any) -> None:
    holder = target if group is None else getattr(target, group)
    setattr(holder, attribute, value)


def parse_config_text(text: str, base: SystemConfig = None) -> SystemConfig:
    """
    Parse a flat ``key = value`` configuration text

    Args:
        text: File contents; ``#`` starts a comment
        base: Configuration to update (a fresh default one when omitted)

    Returns:
        The updated configuration

    Raises:
        ConfigError: naming the offending key on any malformed entry
    """
    result = base if base is not None else SystemConfig()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {lineno}", f"expected 'key = value' on line {lineno}")

        if key == 'tolerances':
            try:
                pairs = _tolerances(value)
            except ValueError as e:
                raise ConfigError(key, str(e))
            for name, tol in pairs.items():
                if name not in _TOLERANCE_KEYS:
                    raise ConfigError(f"tolerances.{name}", "unknown tolerance name")
                if tol <= 0:
                    raise ConfigError(f"tolerances.{name}", "tolerance must be positive")
                group, attribute = _TOLERANCE_KEYS[name]
                _apply(result, group, attribute, tol)
            continue

        if key not in _FILE_KEYS:
            raise ConfigError(key, "unknown configuration key")

        group, attribute, parser = _FILE_KEYS[key]
        try:
            parsed = parser(value)
        except ValueError as e:
            raise ConfigError(key, f"cannot parse '{value}': {e}")
        _validate_value(key, parsed)
        _apply(result, group, attribute, parsed)

    # pairs are checked after every key is read
    if len(result.harness.epsilon_list) != len(result.harness.p_list):
        raise ConfigError('p_list', f"{len(result.harness.p_list)} values for "
                                    f"{len(result.harness.epsilon_list)} epsilon_list entries")

    logger.debug(f"Parsed configuration: {result.to_dict()}")
    return result


def _validate_value(key: str, value: Any) -> None:
    if key in ('n', 'refinement_n', 'friedrichs_n', 'n_forms', 'n_pairs', 'holder_forms',
               'workers') and value < 1:
        raise ConfigError(key, "must be a positive integer")
    if key in ('n', 'refinement_n', 'friedrichs_n') and value % 2:
        raise ConfigError(key, "must be even (cell-centred grid)")
    if key == 'pad_factor' and value < 2:
        raise ConfigError(key, "padding factor must be at least 2")
    if key in ('vanishing_order', 'poly_degree') and value < 0:
        raise ConfigError(key, "must be nonnegative")
    if key == 'friedrichs_radius' and not 0 < value < 1:
        raise ConfigError(key, "radius must lie in (0, 1)")
    if key == 'radii' and any(r <= 0 or r >= 1 for r in value):
        raise ConfigError(key, "radii must lie in (0, 1)")
    if key == 'epsilon_list' and any(e < 0 or e > 1 for e in value):
        raise ConfigError(key, "epsilon values must lie in [0, 1]")
    if key == 'p_list' and any(p < 2 for p in value):
        raise ConfigError(key, "p values must be at least 2")
    if key == 'log_level' and value.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR'):
        raise ConfigError(key, "unknown log level")


def load_config(path: str, base: SystemConfig = None) -> SystemConfig:
    """Load a flat key = value configuration file"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError('config', f"cannot read {path}: {e}")
    return parse_config_text(text, base)


# Global configuration instance
config = SystemConfig()
