"""Exception types shared across the package."""


class PrecisionError(RuntimeError):
    """A numerical routine could not reach its accuracy contract.

    Raised when quadrature fails to converge, a truncated basis is too
    small for the requested tolerance, or a minimizer cannot certify its
    stationarity condition.  Argument validation problems raise
    ``ValueError`` instead.
    """
