"""Exception hierarchy shared by all modules."""


class CavityError(Exception):
    """Base class for every error raised by the package."""


class DiscontinuityError(CavityError):
    """Derivative requested at a point where the trajectory is not smooth enough."""


class ConvergenceError(CavityError):
    """A root finder exhausted its iteration budget."""


class BracketError(CavityError):
    """No sign change could be found for a bracketed root search."""


class QuadratureError(CavityError):
    """Adaptive quadrature did not reach the requested tolerance."""


class DomainError(CavityError, ValueError):
    """Argument outside the domain of the operation."""


class SingularityError(CavityError):
    """A ratio or normalisation is ill-conditioned at the requested point."""


class InvalidCycle(CavityError):
    """Otto cycle parameters violate a thermodynamic bound."""


class FitError(CavityError):
    """Not enough usable points for a regression."""


class TrajectorySpecError(CavityError, ValueError):
    """Malformed trajectory description."""
