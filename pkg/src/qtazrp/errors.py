"""Exception hierarchy shared by all modules.

The CLI maps ParameterError to exit code 2 and NumericalError to exit code 3.
"""


class ParameterError(ValueError):
    """A precondition on the inputs was violated."""


class ContourError(ParameterError):
    """A contour family fails its nesting/winding invariants."""


class NumericalError(RuntimeError):
    """Base class for runtime numerical failures."""


class ConvergenceError(NumericalError):
    """Adaptive refinement failed to reach the requested tolerance."""


class PoleProximityError(NumericalError):
    """A quadrature node came too close to an integrand pole."""
