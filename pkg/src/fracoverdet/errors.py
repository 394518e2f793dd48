"""Exception hierarchy shared by all modules."""


class FracError(Exception):
    """Base class for every error raised by the toolkit."""


class SpecError(FracError, ValueError):
    """Malformed domain, nonlinearity or configuration specification."""


class PreconditionError(FracError, ValueError):
    """An operation was called outside its admissible range."""


class GeometryError(PreconditionError):
    """A geometric precondition (interior sphere, reach, fit quality) failed."""


class ConvergenceError(FracError, RuntimeError):
    """An iterative procedure did not converge.

    ``history`` holds the per-iteration residuals recorded before giving up.
    """

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history or [])
