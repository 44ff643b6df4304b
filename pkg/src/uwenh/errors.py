"""Exception hierarchy shared by all uwenh modules."""


class UwenhError(Exception):
    """Base class for all library errors."""


class UnsupportedFormatError(UwenhError):
    """File format not handled (alpha channel, CMYK, unknown extension...)."""


class CorruptDataError(UwenhError):
    """File exists but cannot be decoded."""


class InvalidBufferStateError(UwenhError):
    """Buffer violates its invariants (NaN/Inf values, bad shape)."""


class ChannelOutOfRangeError(UwenhError):
    """Requested channel index does not exist."""


class NotColourImageError(UwenhError):
    """Operation requires a 3-channel image."""


class ImageTooSmallForTilingError(UwenhError):
    """Image smaller than the requested CLAHE tile grid."""


class InvalidMapError(UwenhError):
    """Piecewise-linear map is malformed (non-monotone, bad endpoints)."""


class StabilityBudgetExceededError(UwenhError):
    """Explicit-scheme stability pre-flight check failed."""


class UnknownPipelineError(UwenhError):
    """No preset pipeline registered under the given name."""
