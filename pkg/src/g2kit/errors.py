"""Exception hierarchy shared by every route."""


class G2KitError(Exception):
    """Base class for all package errors."""


class DomainError(G2KitError, ValueError):
    """Parameters or states outside the model's domain of validity."""


class ConfigError(G2KitError, ValueError):
    """Malformed or inconsistent run configuration."""


class NumericalError(G2KitError, ArithmeticError):
    """Base class for numerical failures inside the Gaussian integral engine."""


class ConvergenceError(NumericalError):
    """The Gaussian exponent is not integrable (real part not positive definite)."""


class SingularError(NumericalError):
    """Exponent matrix is singular or too badly conditioned to invert."""


class DegreeError(G2KitError, ValueError):
    """Requested moment order exceeds the configured degree limit."""
