"""Exception hierarchy.

``InputError`` subclasses describe bad or unreadable input (CLI exit code 2);
everything else derived from ``InkscanError`` is a processing failure.
"""


class InkscanError(Exception):
    """Base class for all inkscan errors."""


class InputError(InkscanError):
    """Malformed or unreadable input data."""


class MissingKey(InputError):
    pass


class UnsupportedDataType(InputError):
    pass


class UnsupportedFeature(InputError):
    pass


class WavelengthCountMismatch(InputError):
    pass


class TruncatedData(InputError):
    pass


class NonFiniteValue(InputError):
    pass


class BandOutOfRange(InkscanError, IndexError):
    pass


class RectOutOfBounds(InkscanError, ValueError):
    pass


class DimensionMismatch(InkscanError, ValueError):
    pass


class DegenerateImage(InkscanError, ValueError):
    pass


class NoLinesFound(InkscanError):
    pass


class EmptyRegion(InkscanError):
    pass


class LengthMismatch(InkscanError, ValueError):
    pass


class UnknownLineId(InkscanError, KeyError):
    pass


class InsufficientDistinctPixels(InkscanError):
    pass


class PaletteTooSmall(InkscanError, ValueError):
    pass


class LayoutOverflow(InkscanError, ValueError):
    pass
