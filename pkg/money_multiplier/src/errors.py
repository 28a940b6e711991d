# src/errors.py
"""Exception hierarchy shared by the solver, loaders and the CLI.

Input problems derive from ValueError and map to exit code 1. Internal
inconsistencies derive from RuntimeError and map to exit code 2.
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(ToolkitError, ValueError):
    """Argument outside the domain of a model function"""


class DegeneratePolicyError(ToolkitError, ValueError):
    """Policy point for which a closed-form object is undefined"""


class InfeasibleTargetError(ToolkitError, ValueError):
    """Observed ratio the model cannot generate"""

    def __init__(self, message: str, supremum: float):
        super().__init__(message)
        self.supremum = supremum


class ScenarioFormatError(ToolkitError, ValueError):
    """Malformed scenario file"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(ToolkitError, ValueError):
    """Unknown key or invalid value in a configuration file"""


class SingularRegressionError(ToolkitError, ValueError):
    """Regressor matrix without full column rank"""


class DegenerateSegmentError(ToolkitError, ValueError):
    """Structural-break segment too short to estimate"""


class CalibrationInfeasibleError(ToolkitError, ValueError):
    """No calibration start reached a solvable point"""


class RowSolveError(ToolkitError, ValueError):
    """A scenario row could not be solved"""


class SolverError(ToolkitError, RuntimeError):
    """Root finder failed to bracket or converge"""


class ClassificationInconsistencyError(ToolkitError, RuntimeError):
    """Regime thresholds and regime solvers disagree"""


def row_failure(period: str, detail: str, exc: Exception) -> ToolkitError:
    """Re-label a failure with the scenario row it happened on, keeping its kind"""
    message = f"period {period} ({detail}): {exc}"
    if isinstance(exc, RuntimeError):
        return ClassificationInconsistencyError(message)
    return RowSolveError(message)
