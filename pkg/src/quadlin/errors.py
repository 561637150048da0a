"""Exception types shared across the package."""


class QuadlinError(Exception):
    """Base class for all package errors."""


class DomainError(QuadlinError, ValueError):
    """Argument outside the region where an evaluation is defined."""


class RegimeError(QuadlinError, ValueError):
    """Operation is not available for the family's torus regime."""


class PoleError(QuadlinError, ZeroDivisionError):
    """Argument too close to a pole of a coefficient function."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class GeometryError(QuadlinError, ValueError):
    """Degenerate or mis-oriented rhombic geometry."""


class TopologyError(QuadlinError, ValueError):
    """Plaquette set does not form a monotone quad-surface."""


class FlipError(QuadlinError, ValueError):
    """Star-triangle flip requested at an unflippable vertex."""


class SingularFaceError(QuadlinError, ZeroDivisionError):
    """Leading coefficient of a face equation vanishes."""


class PropagationError(QuadlinError, ValueError):
    """Cauchy data does not determine the field face by face."""


class ResidualError(QuadlinError, ValueError):
    """Input field violates the equations it is supposed to solve."""


class SolverError(QuadlinError, RuntimeError):
    """Linear solve failed; carries a condition estimate when available."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class InconclusiveError(QuadlinError, ZeroDivisionError):
    """A consistency check hit a singular intermediate value."""
