"""Exception types raised by the library."""


class QutritSynthError(Exception):
    """Base class for all library errors."""


class DimensionError(QutritSynthError, ValueError):
    """Operands have incompatible or unsupported dimensions."""


class NotUnitaryError(QutritSynthError, ValueError):
    """A matrix expected to be unitary is not, within tolerance."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class FormatError(QutritSynthError, ValueError):
    """Malformed file or serialized payload."""


class WireError(QutritSynthError, ValueError):
    """A gate references invalid or repeated wires."""
