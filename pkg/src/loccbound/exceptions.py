"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input violates a structural or physical invariant (bad dims, non-PSD, ...)."""


class SolverError(RuntimeError):
    """A numerical solver failed to converge.

    ``bracket`` holds the last (lower, upper) bracket of a bisection when one
    was running, otherwise ``None``.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
