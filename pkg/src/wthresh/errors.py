"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class FormatError(ValueError):
    """A file or byte stream is not in an accepted format."""


class FrameError(RuntimeError):
    """A window/lattice combination fails the frame condition."""


class SearchError(RuntimeError):
    """An iterative search did not converge to the requested target."""


class FitError(ParameterError):
    """Not enough usable data points for a requested fit."""
