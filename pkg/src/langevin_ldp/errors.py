"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so the CLI can
map them to distinct exit codes.
"""


class LangevinLDPError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LangevinLDPError, ValueError):
    """Invalid parameters, unknown names or malformed descriptors."""


class DomainError(ConfigurationError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(LangevinLDPError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class EvaluationError(NumericalError):
    """A potential returned a non-finite value."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach its tolerance.

    Attributes
    ----------
    achieved : float
        Estimated absolute error actually reached.
    """

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class StabilityError(NumericalError):
    """Scheme is not mean-square stable at the requested step size."""


class DegenerateSpectrumError(NumericalError):
    """Propagation matrix has (numerically) repeated eigenvalues."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class DegenerateRateError(NumericalError):
    """Quadratic rate function is not positive definite."""


class DivergenceError(NumericalError):
    """Simulated state overflowed; ``step`` is the offending step index."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class InsufficientResolutionError(NumericalError):
    """Monte Carlo run produced no hits at any grid value."""
