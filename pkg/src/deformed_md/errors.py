"""Exception hierarchy shared by every module."""


class DeformedError(Exception):
    """Base class for all library errors."""


class DomainError(DeformedError, ValueError):
    """Argument outside the function domain (e.g. a nonpositive log argument)."""


class ParameterError(DeformedError, ValueError):
    """Hyperparameters outside the admissible range."""


class UnsupportedFamilyError(DeformedError, ValueError):
    """Operation not defined for the requested family."""


class ExpOverflowError(DeformedError, OverflowError):
    """Deformed exponential beyond the representable range or past a pole."""


class RangeError(DeformedError, ValueError):
    """Dual coordinate outside the range of the link function."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class SingularityError(DeformedError, ZeroDivisionError):
    """Algebraic operation evaluated at its singular point."""


class BracketError(DeformedError, ValueError):
    """Root bracket could not be established (target outside the range)."""


class ConvergenceError(DeformedError, ArithmeticError):
    """Iterative method did not reach its tolerance."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature did not converge."""


class ConstraintError(DeformedError, ValueError):
    """Weight vector violates its domain constraint."""


class DegenerateError(DeformedError, ArithmeticError):
    """Simplex renormalization of a vector with vanishing mass."""


class StepError(DeformedError):
    """Failure inside an optimizer iteration; carries the iteration index."""

    def __init__(self, iteration, cause):
        super().__init__(f"iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause
