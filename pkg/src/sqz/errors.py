"""Exception types shared by the codecs and the CLI."""


class CorruptStreamError(ValueError):
    """Encoded data cannot be decoded (truncated, malformed or tampered).

    ``stage`` names the pipeline stage that failed, when known.
    """

    def __init__(self, message, stage=None):
        if stage:
            message = f"{stage}: {message}"
        super().__init__(message)
        self.stage = stage


class TruncatedStreamError(CorruptStreamError):
    """A read ran past the end of the available bits."""


class ParameterError(ValueError):
    """Codec parameters are out of range or inconsistent between encode and decode."""
