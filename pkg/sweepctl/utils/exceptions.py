"""
Error hierarchy shared by every module
"""
from typing import Any, Dict, Optional


class SweepctlError(Exception):
    """Base error: a message plus optional structured details"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


# Geometry
class TimeOutOfDomain(SweepctlError):
    pass


class OutsideReach(SweepctlError):
    pass


class NotInSet(SweepctlError):
    pass


class InsideTarget(SweepctlError):
    pass


# Dynamics
class StepTooLarge(SweepctlError):
    pass


class AutonomousOnly(SweepctlError):
    pass


# Solver
class EmptyIntersection(SweepctlError):
    pass


class GridTooCoarse(SweepctlError):
    pass


class OutsideGraph(SweepctlError):
    pass


class BudgetExceeded(SweepctlError):
    pass


class DivergentIntegral(SweepctlError):
    pass


# Hamilton-Jacobi checks
class NotInGraph(SweepctlError):
    pass


class ValueMismatch(SweepctlError):
    pass


class SignConditionFailed(SweepctlError):
    pass


# Scenarios
class DomainError(SweepctlError):
    pass


# CLI
class ConfigError(SweepctlError):
    """Invalid or missing configuration; `line` points into the offending file"""

    def __init__(self, message: str, line: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message
