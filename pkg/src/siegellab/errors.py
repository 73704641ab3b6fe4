"""Exception hierarchy shared by all siegellab modules."""


class SiegelLabError(Exception):
    """Base class for every error raised by siegellab."""


class PrecisionExhausted(SiegelLabError):
    """Working precision is insufficient for the requested computation.

    ``entries`` holds whatever trustworthy partial output was produced
    before precision ran out (continued-fraction entries, for instance).
    """

    def __init__(self, message, entries=()):
        super().__init__(message)
        self.entries = tuple(entries)


class InsufficientDepth(SiegelLabError):
    """A continued fraction is too short for the requested operation."""


class RationalAngle(SiegelLabError):
    """The rotation number is rational, so some small divisor vanishes."""


class DegenerateFit(SiegelLabError):
    """A least-squares fit had no usable data or produced an invalid value."""


class TailTooLarge(SiegelLabError):
    """Truncated series is not accurate enough at the requested radius."""


class CoincidentPoints(SiegelLabError):
    """A pinching was requested for two coincident points."""


class GridMismatch(SiegelLabError):
    """Two curves do not share the same parameter grid."""


class InsufficientScales(SiegelLabError):
    """Separation range too narrow (or too fine) for a regularity fit."""


class NoCandidates(SiegelLabError):
    """A search was given an empty candidate grid."""
