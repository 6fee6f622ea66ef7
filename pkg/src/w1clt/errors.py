"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot deliver its accuracy contract."""


class DivergenceError(NumericalError):
    """Raised when a requested quantity is provably infinite.

    The ``diagnostic`` attribute records the integrand/term exponent that
    caused the divergence.
    """

    def __init__(self, message: str, diagnostic: str | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic
