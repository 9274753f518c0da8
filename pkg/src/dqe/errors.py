"""Exception types shared across the package."""


class DqeError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(DqeError, ValueError):
    """A model, geometry, or run parameter is invalid."""


class PreconditionError(DqeError, ValueError):
    """An operation was called outside its domain of validity."""


class EvaluationError(DqeError, ArithmeticError):
    """A quantity cannot be evaluated at the requested point."""


class SolveError(DqeError, RuntimeError):
    """Base class for envelope root-solver failures."""


class NoCrossingError(SolveError):
    """The envelope never reaches the 1/e threshold in the search window."""


class DivergentRateError(SolveError):
    """All decay rates vanish, so no finite decay time exists."""


class InconclusiveError(DqeError, RuntimeError):
    """A Monte-Carlo estimate could not be extracted from the ensemble.

    Carries a ``diagnostics`` dict describing how far the decay got.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegeneratePolarizationError(ParameterError):
    """The requested drive-field component is undefined at r = 1.

    With equal spin-orbit strengths one drive quadrature decouples; fix
    phi = pi/2 and use a linearly polarized field along x instead.
    """
