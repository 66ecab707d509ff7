"""
Both sides of the verified inequalities for one form
"""

from typing import Dict, Tuple
import logging

from ..models.field_data import OneForm
from ..models.results import EstimateCase
from .norms import (weighted_l2_norm, lp_norm, frame_derivative_norm, sobolev_integer_norm,
                    sobolev_fractional_norm)
from .operators import dbar_oneform_frame, dbar_star

logger = logging.getLogger(__name__)


class EstimateEvaluator:
    """Assembles LHS and RHS of the estimate cases from norms and operators"""

    def __init__(self):
        self._handlers = {
            'E1': self._lbar_estimate,
            'E2': self._l_and_lbar_estimate,
            'E3': self._w1_estimate,
            'E4': self._subelliptic_estimate,
            'E5': self._combined_estimate,
            'E6': self._intermediate_estimate,
            'E7': self._relation_estimate,
            'E8': self._weighted_subelliptic_estimate,
        }

    def evaluate(self, case: EstimateCase, f: OneForm) -> Tuple[float, float]:
        """
        (LHS, RHS) of one case on one form

        Raises:
            InvalidCaseError: from the case parameters
            SupportViolationError: when dbar* cannot be evaluated on f
        """
        case.validate()
        lhs, rhs = self._handlers[case.id](case, f)
        logger.debug(f"{case.label}: lhs={lhs:.6g} rhs={rhs:.6g}")
        return lhs, rhs

    @staticmethod
    def _complex_terms(f: OneForm, weight_power: float = 0.0) -> Dict[str, float]:
        """||gamma^a dbar f|| and ||gamma^a dbar* f||"""
        weight = f.grid.gamma ** weight_power
        return {
            'dbar': weighted_l2_norm(dbar_oneform_frame(f) * weight, 0.0).value,
            'star': weighted_l2_norm(dbar_star(f) * weight, 0.0).value,
        }

    def _lbar_estimate(self, case, f):
        terms = self._complex_terms(f)
        lhs = frame_derivative_norm(f, 'Lbar').squared
        rhs = terms['dbar'] ** 2 + terms['star'] ** 2 + weighted_l2_norm(f, -2.0).squared
        return lhs, rhs

    def _l_and_lbar_estimate(self, case, f):
        terms = self._complex_terms(f)
        lhs = frame_derivative_norm(f, 'L').squared + frame_derivative_norm(f, 'Lbar').squared
        rhs = terms['dbar'] ** 2 + terms['star'] ** 2 + weighted_l2_norm(f, -2.0).squared
        return lhs, rhs

    def _w1_estimate(self, case, f):
        terms = self._complex_terms(f, weight_power=1.0)
        lhs = sobolev_integer_norm(f, 1, 0.0).squared
        rhs = terms['dbar'] ** 2 + terms['star'] ** 2 + weighted_l2_norm(f, -1.0).squared
        return lhs, rhs

    def _subelliptic_estimate(self, case, f):
        terms = self._complex_terms(f)
        lhs = sobolev_fractional_norm(f, case.epsilon).value
        rhs = terms['dbar'] + terms['star'] + lp_norm(f, case.p).value
        return lhs, rhs

    def _combined_estimate(self, case, f):
        shifted = f.scaled(f.grid.gamma ** (1.0 - case.epsilon))
        terms = self._complex_terms(shifted, weight_power=1.0)
        lhs = sobolev_fractional_norm(f, case.epsilon).squared
        rhs = terms['dbar'] ** 2 + terms['star'] ** 2 + lp_norm(f, case.p).squared
        return lhs, rhs

    def _intermediate_estimate(self, case, f):
        lhs = sobolev_fractional_norm(f, case.epsilon).value
        rhs = sobolev_integer_norm(f, 1, 1.0 - case.epsilon).value + lp_norm(f, case.p).value
        return lhs, rhs

    def _relation_estimate(self, case, f):
        lhs = frame_derivative_norm(f, 'L').value
        rhs = frame_derivative_norm(f, 'Lbar').value + weighted_l2_norm(f, -2.0).value
        return lhs, rhs

    def _weighted_subelliptic_estimate(self, case, f):
        # dbar f and dbar* f weighted by gamma^{2-eps}, all terms squared
        terms = self._complex_terms(f, weight_power=2.0 - case.epsilon)
        lhs = sobolev_fractional_norm(f, case.epsilon).squared
        rhs = terms['dbar'] ** 2 + terms['star'] ** 2 + lp_norm(f, case.p).squared
        return lhs, rhs


_evaluator = EstimateEvaluator()


def evaluate_estimate(case: EstimateCase, f: OneForm) -> Tuple[float, float]:
    """(LHS, RHS) of `case` on `f`"""
    return _evaluator.evaluate(case, f)
