"""Error hierarchy shared by every module.

All errors derive from :class:`TropicalError`, itself a ``ValueError``, so
the command line maps the whole family onto exit code 2.
"""

from __future__ import annotations

from typing import Iterable, List, Optional


class ErrorCategory:
    """Coarse error classes, printed next to CLI diagnostics."""

    INPUT = "input"
    SIZE = "size"
    NUMERIC = "numeric"
    GEOMETRY = "geometry"


class TropicalError(ValueError):
    category = ErrorCategory.INPUT

    def describe(self) -> str:
        return f"[{self.category}] {type(self).__name__}: {self}"


class InvalidInput(TropicalError):
    """Malformed JSON document or argument."""


class InvalidGraph(TropicalError):
    """A metric graph violating connectivity or positivity of lengths."""


class BadParameter(TropicalError):
    pass


class TooLarge(TropicalError):
    category = ErrorCategory.SIZE


class ContractAll(TropicalError):
    category = ErrorCategory.GEOMETRY


class BadGenus(TropicalError):
    category = ErrorCategory.GEOMETRY


class NotAContraction(TropicalError):
    category = ErrorCategory.GEOMETRY


class UncoveredEdge(TropicalError):
    pass


class StabilityError(TropicalError):
    """Stable dual graph failure; ``violations`` lists every problem found."""

    category = ErrorCategory.GEOMETRY

    def __init__(self, violations: Iterable[str]) -> None:
        self.violations: List[str] = list(violations)
        super().__init__("; ".join(self.violations))


class GenusMismatch(StabilityError):
    pass


class UnstableVertex(StabilityError):
    pass


class NotPositiveDefinite(TropicalError):
    category = ErrorCategory.NUMERIC


class NotUpperHalfPlane(TropicalError):
    category = ErrorCategory.NUMERIC


class InadmissibleOrdering(TropicalError):
    category = ErrorCategory.GEOMETRY


class NotDegenerate(TropicalError):
    category = ErrorCategory.GEOMETRY


class MixedGrowth(TropicalError):
    category = ErrorCategory.GEOMETRY


class NotModelForm(TropicalError):
    category = ErrorCategory.GEOMETRY


class TreeInput(TropicalError):
    category = ErrorCategory.GEOMETRY


class NoConvergence(TropicalError):
    category = ErrorCategory.NUMERIC

    def __init__(self, message: str, best: Optional[object] = None) -> None:
        super().__init__(message)
        self.best = best
