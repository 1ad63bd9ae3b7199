"""Exception hierarchy shared by all modules."""


class RYMapError(Exception):
    """Base class for every error raised by this package."""


class EvaluationDomainError(RYMapError, ValueError):
    """A field was evaluated outside its domain or returned non-finite values."""


class DomainMarginError(EvaluationDomainError):
    """The point is inside the domain but a finite-difference stencil is not."""


class DegenerateMetricError(RYMapError, ValueError):
    """The metric matrix is singular or not positive definite."""


class PositivityError(RYMapError, ValueError):
    """A quantity required to be positive (conformal factor, curvature) is not."""


class ClosedFormUnavailable(RYMapError, NotImplementedError):
    """No printed closed form exists for the requested flow kind."""


class NotRYFlowError(RYMapError, ValueError):
    """An identity presupposing the RY flow equation was requested on a flow violating it."""


class PreconditionError(RYMapError, ValueError):
    """A documented precondition on parameters or inputs is violated."""


class CFLViolation(RYMapError, ValueError):
    """Explicit time step exceeds the diffusive stability bound."""

    def __init__(self, dt, dt_max):
        super().__init__(f"dt={dt:.6g} exceeds the stability bound {dt_max:.6g}; use dt <= {dt_max:.6g}")
        self.dt = dt
        self.suggested_dt = dt_max


class BlowUpError(RYMapError, RuntimeError):
    """The conformal exponent left the representable range."""

    def __init__(self, message, last_valid_t, trajectory=None):
        super().__init__(message)
        self.last_valid_t = last_valid_t
        self.trajectory = trajectory


class ConfigError(RYMapError, ValueError):
    """Invalid run configuration text; carries the offending line when known."""

    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key
