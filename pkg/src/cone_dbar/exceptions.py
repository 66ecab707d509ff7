"""
Error conditions raised by the library
"""


class ConeDbarError(Exception):
    """Base class for all library errors"""


class DegenerateMetricError(ConeDbarError):
    """The metric vanishes (origin), so g_inv and the frame do not exist"""


class InvalidInputError(ConeDbarError):
    """Arguments violate an operation's preconditions"""


class UnderResolvedError(ConeDbarError):
    """The grid spacing is too coarse for the requested operation"""


class SupportViolationError(ConeDbarError):
    """A field that must be compactly supported touches the mask boundary"""


class WraparoundRiskError(ConeDbarError):
    """Support too close to the box edge for the periodic transform"""


class InvalidCaseError(ConeDbarError):
    """Estimate case parameters outside their admissible range"""


class ConfigError(ConeDbarError):
    """Malformed configuration entry"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"invalid configuration key '{key}': {message}")
