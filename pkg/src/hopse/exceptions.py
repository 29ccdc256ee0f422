"""Exception hierarchy for hopse."""


class HopseError(Exception):
    """Base class for every error raised by this package."""


class OrderViolation(HopseError, ValueError):
    pass


class DuplicateCell(HopseError, ValueError):
    pass


class TooLarge(HopseError, ValueError):
    pass


class RankMismatch(HopseError, ValueError):
    pass


class UnknownSet(HopseError, KeyError):
    pass


class EmptyGraph(HopseError, ValueError):
    pass


class ChannelMismatch(HopseError, ValueError):
    pass


class ShapeError(HopseError, ValueError):
    pass


class Diverged(HopseError, RuntimeError):
    pass


class RouteOverflow(HopseError, OverflowError):
    pass


class FormatError(HopseError, ValueError):
    """Malformed input file."""
