"""
Exception hierarchy for the disequilibrium lab.
Every error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class DisequilibriumError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class DomainError(DisequilibriumError, ValueError):
    """A value lies outside the mathematical domain of the model."""

    exit_code = 2

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigError(DisequilibriumError):
    """Malformed run configuration or simulation request."""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class Infeasible(DisequilibriumError):
    """No admissible parameter value achieves the requested target."""

    exit_code = 3


class NoInteriorOptimum(DisequilibriumError):
    """Welfare has no interior maximiser for the given exploration benefit."""

    exit_code = 3


class NonConcave(DisequilibriumError):
    """The first-order condition has several roots on the search grid."""

    exit_code = 3


class NotConverged(DisequilibriumError):
    """Iteration or simulation ran out of budget before meeting its tolerance."""

    exit_code = 3

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
