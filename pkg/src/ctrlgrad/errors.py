"""Exception types shared across the package.

The CLI maps these onto exit codes: argument and dimension problems are
usage errors (1), violated numerical contracts are reported as 2, and
file/parse problems as 3.
"""

__all__ = [
    "CtrlgradError",
    "DimensionError",
    "UnsupportedSizeError",
    "InvalidParameterError",
    "ScheduleExhaustedError",
    "ContractViolationError",
    "NoCriticalPointError",
    "SteeringInfeasibleError",
    "IllConditionedGramianError",
    "SchemaError",
]


class CtrlgradError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(CtrlgradError, ValueError):
    """Shapes of the supplied arrays are inconsistent."""


class UnsupportedSizeError(CtrlgradError, ValueError):
    """Input is larger than the documented size limit for the operation."""


class InvalidParameterError(CtrlgradError, ValueError):
    """A scalar parameter is outside its admissible range (e.g. gamma <= 0)."""


class ScheduleExhaustedError(CtrlgradError, ValueError):
    """A control schedule ran out before the iteration finished."""


class ContractViolationError(CtrlgradError):
    """A numerical contract failed (asymmetry, indefiniteness, residual too large...)."""


class NoCriticalPointError(ContractViolationError):
    """Ax = -b is inconsistent: the quadratic has no critical point."""


class SteeringInfeasibleError(ContractViolationError):
    """Steering requested for a system that is not controllable."""


class IllConditionedGramianError(ContractViolationError):
    """Controllability Gramian too ill-conditioned for reliable steering."""


class SchemaError(CtrlgradError, ValueError):
    """A JSON document does not match the expected schema."""
