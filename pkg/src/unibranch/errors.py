"""Exception hierarchy shared by all modules."""


class UnibranchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UnibranchError):
    """A point lies outside the open admissible set (margin <= 0)."""


class EvaluationError(UnibranchError):
    """A residual or Jacobian evaluation produced non-finite values."""


class NotAZeroError(UnibranchError):
    """An operation that needs a zero of F received a point with a large residual."""


class SingularPointError(UnibranchError):
    """The Jacobian is singular where a regular point was required.

    Continuation catches this and routes the point to the Lyapunov-Schmidt
    machinery in :mod:`unibranch.singular`.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class AdmissibilityError(UnibranchError):
    """Degree or parity requested for a non-admissible configuration."""


class DegeneracyError(UnibranchError):
    """A zero with singular Jacobian was found inside a degree box.

    The usual remedy is to compute ``deg(f - v)`` for a small regular value
    ``v`` instead.
    """


class StepFailure(UnibranchError):
    """Corrector did not converge within the iteration budget."""


class DomainExit(StepFailure):
    """Corrector converged to a point outside the admissible set."""

    def __init__(self, message, point=None, margin=None):
        super().__init__(message)
        self.point = point
        self.margin = margin


class ReductionError(UnibranchError):
    """Lyapunov-Schmidt reduction could not be set up."""


class TrustRegionError(ReductionError):
    """Inner Newton for the implicit map failed; the trust radius is too large."""


class IsolatedPointError(ReductionError):
    """The reduced map has no sign changes around the singular point."""


class UnsupportedDimensionError(ReductionError):
    """Branch enumeration was requested for kernel dimension >= 2."""


class AmbiguousPairingError(ReductionError):
    """More than one outgoing half-branch could continue the incoming one."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class ConfigError(UnibranchError, ValueError):
    """Invalid run configuration or problem parameters."""


class OracleError(UnibranchError):
    """An independent oracle could not produce a value (bad bracket, refine needed)."""
