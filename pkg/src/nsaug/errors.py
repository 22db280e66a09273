"""Exception types raised by the augmentation library."""


class NsaugError(Exception):
    """Base class for all library errors."""


class InvalidSignalError(NsaugError, ValueError):
    """Samples are non-finite, too short, or the sampling rate is invalid."""


class InvalidBandError(NsaugError, ValueError):
    """Band edges fall outside the open interval (0, fs/2)."""


class InsufficientLengthError(NsaugError, ValueError):
    """Input is too short for the requested window or lag."""


class EmptyInputError(NsaugError, ValueError):
    pass


class InvalidMarginError(NsaugError, ValueError):
    """Fixed edges would cover the whole segment."""


class EngineError(NsaugError, RuntimeError):
    """Surrogate generation failed for a given channel/segment."""

    def __init__(self, message, channel=None, segment=None):
        self.channel = channel
        self.segment = segment
        where = []
        if channel is not None:
            where.append(f"channel {channel}")
        if segment is not None:
            where.append(f"segment {segment}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
