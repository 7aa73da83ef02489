"""Exception hierarchy shared by the estimation, sampling and I/O layers."""


class FscError(Exception):
    """Base class for all package errors."""


class DegenerateParameterError(FscError, ValueError):
    """A scale parameter fell below the floor or a density underflowed to zero."""


class EmptyComponentError(FscError):
    """A mixture component received (numerically) zero effective weight."""


class DegenerateFitError(FscError):
    """EM aborted because the iterate became numerically unusable."""


class InsufficientDataError(FscError, ValueError):
    """Not enough observations or records to build the requested sample."""


class DataParseError(FscError, ValueError):
    """Malformed input file. ``row`` is 1-based when known."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
