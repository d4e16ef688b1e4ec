"""Semantic exception hierarchy shared across the library."""

from __future__ import annotations


class MatchnetError(Exception):
    """Base class for all library errors."""


class DomainError(MatchnetError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConstructionError(MatchnetError, ValueError):
    """A constructed object fails its own verification (FOSD/MPS guards)."""


class SizeGuardError(MatchnetError, ValueError):
    """An exact enumeration oracle was asked for an infeasible market size."""


class NumericError(MatchnetError, ArithmeticError):
    """A numerical routine failed to converge to its required tolerance."""

    def __init__(self, message: str, achieved_tol: float | None = None):
        super().__init__(message)
        self.achieved_tol = achieved_tol
