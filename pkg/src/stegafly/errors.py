"""Exception hierarchy shared by every stegafly module."""


class StegoError(Exception):
    """Base class for all library errors."""


class ConfigError(StegoError, ValueError):
    """Invalid optimizer, metric or experiment configuration."""


class ShapeError(StegoError, ValueError):
    """Array or image dimensions do not agree."""


class UndefinedMetricError(StegoError, ArithmeticError):
    """A metric has no defined value for the given inputs."""


class CapacityError(StegoError):
    """The payload does not fit into the cover image."""

    def __init__(self, message, capacity=None):
        super().__init__(message)
        self.capacity = capacity


class FormatError(StegoError):
    """Malformed header, bitstream, or unsupported file format."""


class CorruptionError(StegoError):
    """Integrity check (CRC) failed on the extracted ciphertext."""


class WrongKeyError(StegoError):
    """Decryption failed, almost certainly because of a wrong passphrase."""
