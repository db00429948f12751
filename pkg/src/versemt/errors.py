"""Exception hierarchy shared by every stage.

The CLI maps :class:`DataError` to exit status 2 and :class:`NumericError`
to exit status 3.
"""


class VersemtError(Exception):
    pass


class DataError(VersemtError, ValueError):
    """Input data or configuration is unusable."""


class NumericError(VersemtError, ArithmeticError):
    """A non-finite value showed up during training."""


class CorpusParseError(DataError):
    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class DuplicateVerseError(DataError):
    def __init__(self, ref):
        self.ref = ref
        super().__init__(f"duplicate verse id {ref}")


class EmptyCorpusError(DataError):
    pass


class SplitSizeError(DataError):
    def __init__(self, required, available):
        self.required = required
        self.available = available
        super().__init__(
            f"corpus too small: test+val needs {required} pairs plus at least one "
            f"training pair, but only {available} available")


class UnknownTokenError(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DimensionError(DataError):
    pass


class CheckpointError(DataError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointChecksumError(CheckpointError):
    pass


class ConfigError(DataError):
    pass


class ConfigPathError(ConfigError):
    pass
