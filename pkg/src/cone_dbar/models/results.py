"""
Result data models: operator outputs, norm values, estimate cases and reports
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Any, Union
import math

import numpy as np
import pandas as pd

from .field_data import ScalarField, OneForm
from ..exceptions import InvalidCaseError

ESTIMATE_CASES = {
    'E1': "Lbar-norm weighted estimate",
    'E2': "L and Lbar norms",
    'E3': "W1 estimate for L^{2,-1} forms",
    'E4': "subelliptic W^eps estimate (interior)",
    'E5': "combined subelliptic form",
    'E6': "intermediate Sobolev bound",
    'E7': "L versus Lbar relation",
    'E8': "weighted subelliptic estimate",
}

# cases carrying the (epsilon, p) constraint p > 4 / (2 - epsilon)
FRACTIONAL_CASES = ('E4', 'E5', 'E6', 'E8')


@dataclass
class OperatorOutput:
    """Principal term of an operator and the residual against the full operator"""
    principal: Union[ScalarField, OneForm]
    residual: Optional[Union[ScalarField, OneForm]] = None
    coefficients: Optional[List[ScalarField]] = None
    skipped: Optional[np.ndarray] = None

    @property
    def skipped_count(self) -> int:
        return 0 if self.skipped is None else int(np.count_nonzero(self.skipped))


@dataclass
class NormValue:
    """One evaluated norm"""
    value: float
    kind: str  # L2k | Lp | LbarL | Wsk | Weps
    parameters: Dict[str, Any] = field(default_factory=dict)
    quadrature_resolution: int = 0
    possibly_divergent: bool = False
    auxiliary: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0 or math.isnan(self.value):
            raise ValueError(f"norm value must be nonnegative, got {self.value}")

    @property
    def squared(self) -> float:
        return self.value * self.value


@dataclass(frozen=True)
class EstimateCase:
    """One of the verified inequalities"""
    id: str
    epsilon: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.id not in ESTIMATE_CASES:
            raise InvalidCaseError(f"unknown estimate case '{self.id}'")
        if self.id in FRACTIONAL_CASES:
            if self.epsilon is None or self.p is None:
                raise InvalidCaseError(f"{self.id} requires epsilon and p")
            if not 0.0 <= self.epsilon <= 1.0:
                raise InvalidCaseError(f"{self.id} requires 0 <= epsilon <= 1, got {self.epsilon}")
            threshold = 4.0 / (2.0 - self.epsilon)
            if not self.p > threshold:
                raise InvalidCaseError(
                    f"{self.id} requires p > 4/(2-epsilon) = {threshold:.6g}, "
                    f"got p = {self.p:g} at epsilon = {self.epsilon:g}")

    @property
    def homogeneity(self) -> int:
        """Degree of both sides in the form amplitude"""
        return 1 if self.id in ('E4', 'E6', 'E7') else 2

    @property
    def parameters(self) -> Dict[str, Any]:
        if self.id in FRACTIONAL_CASES:
            return {'epsilon': self.epsilon, 'p': self.p}
        return {}

    @property
    def label(self) -> str:
        if self.id in FRACTIONAL_CASES:
            return f"{self.id}_eps{self.epsilon:g}_p{self.p:g}"
        return self.id


@dataclass
class EstimateReport:
    """Per-form rows and the summary of one sweep"""
    case: EstimateCase
    rows: pd.DataFrame
    n_list: List[int]
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get('passed', False))

    @property
    def max_ratio(self) -> Optional[float]:
        return self.summary.get('max_ratio')

    def to_summary(self, rows_csv: str) -> Dict[str, Any]:
        """JSON summary: {case, parameters, n_list, max_ratio, stable, rows_csv, ...}"""
        result = {
            'case': self.case.id,
            'parameters': self.case.parameters,
            'n_list': list(self.n_list),
            'max_ratio': self.summary.get('max_ratio'),
            'stable': bool(self.summary.get('stable', False)),
            'rows_csv': rows_csv,
        }
        for key in ('mean_ratio', 'per_radius_max', 'per_resolution_max', 'drift',
                    'trend_violation', 'trend_ok', 'degenerate_rows', 'failed_rows', 'passed'):
            if key in self.summary:
                result[key] = self.summary[key]
        return result


@dataclass
class ConvergenceTable:
    """Rows (eps, error) of one mollification study"""
    operator: str
    eps: List[float]
    errors: List[float]
    observed_order: Optional[float] = None
    step_violations: int = 0
    final_ratio: Optional[float] = None
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'operator': self.operator,
            'eps': list(self.eps),
            'errors': [float(e) for e in self.errors],
            'observed_order': self.observed_order,
            'step_violations': self.step_violations,
            'final_ratio': self.final_ratio,
            'passed': self.passed,
        }
