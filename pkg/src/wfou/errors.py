"""Exception types shared across the package.

The CLI maps ``ConfigError`` to exit code 2 and ``NumericError`` to exit
code 3; ``OSError`` is left to propagate and maps to exit code 4.
"""


class ConfigError(ValueError):
    """Invalid user-supplied parameters or configuration."""


class DomainError(ConfigError):
    """Argument outside the domain of a mathematical function."""


class ParameterError(ConfigError):
    """Violated admissibility constraint on the (a, b) exponent pair."""

    def __init__(self, constraint: str, a: float, b: float):
        self.constraint = constraint
        self.a = a
        self.b = b
        super().__init__(f"invalid wfBm parameters a={a!r}, b={b!r}: {constraint}")


class NumericError(ArithmeticError):
    """A numerical routine could not deliver a trustworthy result."""


class ConvergenceError(NumericError):
    """An iterative or adaptive routine failed to converge."""


class FactorizationFailed(NumericError):
    """Cholesky factorization failed even after the last jitter level."""


class DegenerateDenominator(NumericError):
    """An estimator's denominator is zero, so the estimate is undefined."""
