"""Two-time photon correlations of a linearly damped, parametrically driven mode."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    DegreeError,
    DomainError,
    G2KitError,
    NumericalError,
    SingularError,
)
from .model import MomentState, SystemParams, validate_params  # noqa: E402
from .regression import CorrelationCurve, classify, g1_curve, g2_curve, steady_state  # noqa: E402

__all__ = [
    "__version__",
    "G2KitError",
    "DomainError",
    "ConfigError",
    "NumericalError",
    "ConvergenceError",
    "SingularError",
    "DegreeError",
    "SystemParams",
    "MomentState",
    "validate_params",
    "CorrelationCurve",
    "classify",
    "g1_curve",
    "g2_curve",
    "steady_state",
]
