"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataFormatError
(and subclasses) -> 3, TrainingDivergedError -> 4.
"""


class HdcryptError(Exception):
    pass


class ConfigError(HdcryptError, ValueError):
    """An invalid configuration value. `field` names the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionError(HdcryptError, ValueError):
    """Shape mismatch between an operand and what the operation expects."""


class DataFormatError(HdcryptError, ValueError):
    """A malformed file or byte stream. `offset` is the first bad byte."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class CharsetError(DataFormatError):
    """Plaintext contains a character outside the supported charset."""

    def __init__(self, char, index):
        self.char = char
        self.index = index
        super().__init__(
            f"character {char!r} at index {index} is outside the supported charset",
            offset=index,
        )


class TrainingDivergedError(HdcryptError, ArithmeticError):
    """Non-finite loss encountered while training. `epoch` is 0-based."""

    def __init__(self, epoch, message="non-finite loss"):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: {message}")


class DegenerateStatisticError(HdcryptError, ValueError):
    """A statistic is undefined on this input (e.g. zero variance)."""
