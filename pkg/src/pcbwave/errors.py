"""Exception hierarchy shared by every pcbwave module."""


class PcbwaveError(ValueError):
    """Base class for all data/validation errors raised by the library."""


class OddDimension(PcbwaveError):
    pass


class NonDyadic(PcbwaveError):
    pass


class DimensionMismatch(PcbwaveError):
    pass


class SingleClass(PcbwaveError):
    pass


class NotConverged(PcbwaveError):
    pass


class MalformedPgm(PcbwaveError):
    pass


class OutOfRange(PcbwaveError):
    pass


class MixedDimensions(PcbwaveError):
    pass


class EmptyClass(PcbwaveError):
    pass


class InfeasibleSplit(PcbwaveError):
    pass


class LengthMismatch(PcbwaveError):
    pass


class EmptyInput(PcbwaveError):
    pass


class ModelFormatError(PcbwaveError):
    pass
