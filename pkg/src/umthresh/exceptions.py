"""Exception hierarchy.

Every error raised on purpose by the package derives from ``UmthreshError``
and carries an ``exit_code`` the CLI maps onto process status.
"""


class UmthreshError(Exception):
    exit_code = 2


class ImageFormatError(UmthreshError, ValueError):
    """A PGM file could not be parsed."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class MalformedHeader(ImageFormatError):
    pass


class MaxvalOutOfRange(ImageFormatError):
    pass


class TruncatedData(ImageFormatError):
    pass


class IoFailure(UmthreshError, OSError):
    pass


class InvalidImage(UmthreshError, ValueError):
    pass


class EvenWindow(UmthreshError, ValueError):
    pass


class NoPeaks(UmthreshError, ValueError):
    pass


class WidthMismatch(UmthreshError, ValueError):
    pass


class EmptyMeasureSet(UmthreshError, ValueError):
    pass


class UnknownGateKind(UmthreshError, KeyError):
    pass


class EmptyBasis(UmthreshError, ValueError):
    pass


class BasisMismatch(UmthreshError, ValueError):
    pass


class BadLength(UmthreshError, ValueError):
    pass


class NotNormalized(UmthreshError, ValueError):
    pass


class EmptyOverlap(UmthreshError, ValueError):
    pass


class NotPowerOfTwoSquare(UmthreshError, ValueError):
    pass


class WidthCapExceeded(UmthreshError):
    exit_code = 3


class OutOfRange(UmthreshError, ValueError):
    pass


class MissingPosition(UmthreshError, ValueError):
    pass


class ConflictingAncilla(UmthreshError, ValueError):
    pass


class DimensionMismatch(UmthreshError, ValueError):
    pass


class WindowTooLarge(UmthreshError, ValueError):
    pass


class DegenerateHistogram(UmthreshError, ValueError):
    pass


class TooFewLevels(UmthreshError, ValueError):
    pass
