"""Exception types raised across the package."""


class DsDiracError(Exception):
    """Base class for all package errors."""


class PreconditionError(DsDiracError, ValueError):
    """An argument violates the documented domain of an operation."""


class PoleError(PreconditionError):
    """Gamma (or an unregularized series) evaluated at a pole."""


class DegenerateConnectionError(PreconditionError):
    """The z -> 1 - z connection formula is singular because c - a - b is an integer."""


class SingularTimeError(PreconditionError):
    """The conformal chart was asked to touch tau = 0."""


class DegenerateAxisError(PreconditionError):
    """A momentum vector is (anti)parallel to the 3-axis."""


class ConvergenceError(DsDiracError, ArithmeticError):
    """A series exhausted its term cap before the tail tolerance was met."""


class StepSizeUnderflow(DsDiracError, ArithmeticError):
    """The adaptive integrator could not make progress."""


class NotConvergedError(DsDiracError, ArithmeticError):
    """Asymptotic coefficients did not settle between two extraction times."""


class QuadratureNotConverged(DsDiracError, ArithmeticError):
    """n versus 2n Gauss-Legendre refinement disagreed beyond tolerance."""


class FitQualityError(DsDiracError, ArithmeticError):
    """A log-log fit has residuals too large for the slope to be meaningful."""


class DegenerateSpectrumError(DsDiracError, UserWarning):
    """An eigenvalue sits on the spectral cut at zero.

    Issued through :mod:`warnings`, never raised by the library itself.
    """
