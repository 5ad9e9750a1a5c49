"""Exception hierarchy shared by all heunbeta modules."""


class HeunError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HeunError, ValueError):
    """An argument lies outside the supported real domain."""


class PoleError(HeunError, ZeroDivisionError):
    """A parameter sits on (or within tolerance of) a pole."""


class DivergenceError(HeunError, ArithmeticError):
    """A hypergeometric series does not converge at the requested argument."""


class ConvergenceError(HeunError, ArithmeticError):
    """A series ran out of terms before passing its stopping test."""


class ConstraintError(HeunError, ValueError):
    """Parameters violate a structural constraint (Fuchsian, termination case)."""


class CertificationError(HeunError, ArithmeticError):
    """A computed root or terminated series failed its numerical certificate."""


class StepFailure(HeunError, RuntimeError):
    """The adaptive integrator could not make progress."""


class QuadratureError(HeunError, ArithmeticError):
    """Adaptive quadrature failed or the integrand is not integrable."""
