"""Exception types shared across the package."""


class TalsegError(Exception):
    """Base class for all errors raised by talseg.

    ``module`` names the pipeline stage that raised, so the CLI can tag
    diagnostics.
    """

    module = "talseg"


class RecordFormatError(TalsegError, ValueError):
    """A line-delimited record could not be parsed or failed validation."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TraceFormatError(RecordFormatError):
    module = "trace_io"


class ScoreFormatError(RecordFormatError):
    module = "classifier_adapter"


class SubmissionFormatError(RecordFormatError):
    module = "postprocess"


class ConfigError(TalsegError, ValueError):
    module = "config"


class MatchingSizeError(TalsegError, ValueError):
    module = "scorer"


class ScriptError(TalsegError, ValueError):
    module = "synth"
