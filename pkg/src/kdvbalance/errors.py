"""Exception hierarchy shared by the solver, the balance-law engine and the CLI."""


class KdVError(Exception):
    """Base class for every error raised by kdvbalance."""


class GridError(KdVError, ValueError):
    """Invalid grid construction or incompatible grids."""


class NonFiniteError(KdVError, ValueError):
    """A field contains NaN or Inf samples."""


class TailMassError(KdVError):
    """The solution is not negligible near the periodic boundary.

    Raised when the whole-line problem can no longer be represented on the
    periodic box (wrap-around would contaminate the result).
    """


class BlowUpError(KdVError):
    """The time integrator produced a non-finite or runaway state."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class ConfigError(KdVError, ValueError):
    """Invalid solver or run configuration."""

    def __init__(self, message, path=None):
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
