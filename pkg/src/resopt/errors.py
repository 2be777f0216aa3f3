"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: validation problems exit 2, divergence
exits 3, I/O failures exit 4.
"""

from __future__ import annotations


class ResoptError(Exception):
    """Base class for all package errors."""


class ValidationError(ResoptError):
    """A scenario file, matrix, or parameter violates a documented invariant."""


class AssumptionViolatedError(ValidationError):
    """The joint-connectivity hypothesis fails: no common positive stationary
    vector, or the union mirror graph has a non-positive minimum cut."""


class CapabilityError(ResoptError):
    """Input is outside the range the exhaustive/oracle implementation supports."""


class RegulationError(ValidationError):
    """The regulator equations admit no solution at the requested tolerance."""


class ConvexityViolatedError(ValidationError):
    """A cost's second derivative is non-positive somewhere on the working box."""


class UnboundedObjectiveError(ResoptError):
    """No sign change of the summed gradient was found inside the search range."""


class DivergenceError(ResoptError):
    """A simulated state left the finite range. Carries the abort time and the
    trajectory truncated to the last finite grid point."""

    def __init__(self, time: float, trajectory=None):
        super().__init__(f"state became non-finite or exceeded 1e9 at t={time:.6f}")
        self.time = time
        self.trajectory = trajectory
