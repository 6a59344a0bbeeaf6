"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class NumericError(ArithmeticError):
    """A computed quantity is not finite.

    ``index`` carries the Fock index (or grid index) at which it happened.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TruncationError(RuntimeError):
    """Adaptive truncation could not reach the requested tail bound."""
