"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: parameter/usage errors are configuration
problems (exit 2), the numerical ones are pipeline failures (exit 3).
"""


class ConifoldLabError(Exception):
    """Base class for every error raised by the package."""


class UsageError(ConifoldLabError, ValueError):
    """Inconsistent arguments, e.g. tangent vectors at different base points."""


class ParameterError(ConifoldLabError, ValueError):
    """A construction parameter is outside its admissible range."""


class DomainError(ConifoldLabError, ValueError):
    """A point does not lie on the manifold a map is defined on."""


class NumericalError(ConifoldLabError, ArithmeticError):
    """Base class for failures of a numerical pipeline."""


class SingularityError(NumericalError):
    """Evaluation at (or too close to) a singular point, e.g. the conifold node."""


class DegenerateError(NumericalError):
    """A frame, tangent basis or 2-plane is (numerically) degenerate."""


class PreconditionError(NumericalError):
    """An input violates a geometric precondition by more than the tolerance."""
