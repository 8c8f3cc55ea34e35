"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument violates an operation's preconditions."""


class InvalidGluingError(ValueError):
    """A gluing request is geometrically inadmissible (overlapping arcs, neck too large, ...)."""


class BracketError(ValueError):
    """Root bracket does not straddle a sign change."""


class AssemblyError(RuntimeError):
    """Finite-element assembly failed (degenerate triangle, inconsistent complex)."""


class FactorizationError(RuntimeError):
    """Sparse factorization of the interior block failed."""


class SolverError(RuntimeError):
    """Eigensolve did not meet its residual contract."""


class ResolutionError(RuntimeError):
    """A quadrature or mesh is too coarse for the requested tolerance."""
