"""Exception hierarchy for analysis failures.

Every error that can surface from the analysis pipeline derives from
:class:`AnalysisError` and carries a machine-readable record, so the CLI can
dump it and exit with the honest-failure code instead of guessing.
"""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for all honest analysis failures."""

    def record(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class IdenticallyZeroField(AnalysisError):
    """Both components of the field are the zero polynomial."""


class DegenerateSystem(AnalysisError):
    """The two components share a nonconstant factor; reduce first."""


class EpsilonTooLarge(AnalysisError):
    """The level oval encloses foreign structure; shrink and retry."""


class UnresolvedDegeneracy(AnalysisError):
    """Classification inconclusive at the configured tolerances."""


class BudgetExhausted(AnalysisError):
    """Trajectory integration budget ran out before a certified terminal."""


class NonIsolatedFixedPoints(AnalysisError):
    """Return-map displacement vanishes on an interval without a symmetry witness."""


class AmbiguousConnection(AnalysisError):
    """Saddle-connection residual fell in the guard band between accept and reject."""


class CollarTooTight(AnalysisError):
    """No offset distance in the search range certifies transversality."""


class EmbeddingAmbiguity(AnalysisError):
    """Two incident edge germs could not be angularly separated."""


class BoundViolation(AnalysisError):
    """A theorem-backed bound failed; this signals a bug, not bad input."""


class InequalityViolation(BoundViolation):
    """The nest inequality failed; signals a detection bug."""


class BudgetExceeded(AnalysisError):
    """An exact enumeration was requested beyond its feasibility budget."""
