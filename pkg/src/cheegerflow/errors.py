"""Exception types raised across the package."""


class CheegerFlowError(Exception):
    """Base class for all package errors."""


class InvalidDomainError(CheegerFlowError, ValueError):
    """A polygon or domain description is degenerate or malformed."""


class ResolutionTooCoarseError(CheegerFlowError, ValueError):
    """Rasterization produced no interior cell."""


class DomainError(CheegerFlowError, ValueError):
    """A numeric argument lies outside the domain of a formula."""


class InfeasibleFlowError(CheegerFlowError, ValueError):
    """A flow violates the capacity constraint or conservation."""


class NotMaxFlowError(CheegerFlowError, ValueError):
    """A flow passed as maximal admits an augmenting path."""


class BracketError(CheegerFlowError, RuntimeError):
    """Bisection could not find an infeasible upper bracket."""


class ConvergenceError(CheegerFlowError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
