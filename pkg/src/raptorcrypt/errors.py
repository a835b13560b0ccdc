"""Exception hierarchy shared by the coding and commitment layers."""


class RaptorCryptError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(RaptorCryptError, ValueError):
    pass


class InvalidSymbol(RaptorCryptError, ValueError):
    pass


class SeedOverflow(RaptorCryptError, OverflowError):
    pass


class InfeasibleThreshold(RaptorCryptError):
    """No uniform fragment size satisfies both sizing inequalities.

    ``reason`` is ``"above_maximum"`` when s exceeds the maximum threshold for
    the overheads, and ``"rounding"`` when integer rounding at small k is the
    only obstacle.
    """

    def __init__(self, message, reason):
        super().__init__(message)
        self.reason = reason


class InvalidKey(RaptorCryptError, ValueError):
    pass


class MixedKeyId(RaptorCryptError):
    pass


class DuplicateMember(RaptorCryptError):
    pass


class MalformedFragment(RaptorCryptError, ValueError):
    pass


class IndexMismatch(RaptorCryptError, ValueError):
    pass


class MalformedFile(RaptorCryptError, ValueError):
    """A commitment, reveal, receipt or key file failed to parse."""
