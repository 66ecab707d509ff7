"""
Data models for the verification harness
"""

from .geometry_data import Point, MetricData, Frame, OrderReport
from .field_data import Grid, ScalarField, OneForm, TestFormSpec, COORDINATE, FRAME
from .results import (OperatorOutput, NormValue, EstimateCase, EstimateReport, ConvergenceTable,
                      ESTIMATE_CASES, FRACTIONAL_CASES)

__all__ = ['Point', 'MetricData', 'Frame', 'OrderReport',
           'Grid', 'ScalarField', 'OneForm', 'TestFormSpec', 'COORDINATE', 'FRAME',
           'OperatorOutput', 'NormValue', 'EstimateCase', 'EstimateReport', 'ConvergenceTable',
           'ESTIMATE_CASES', 'FRACTIONAL_CASES']
