"""Exception types raised across the package."""


class ConstkitError(Exception):
    """Base class for all library errors."""


class DegenerateConstellation(ConstkitError):
    """Coincident points or zero average energy."""


class InvalidDistribution(ConstkitError):
    """Probability vector that is negative, mis-sized, or does not sum to one."""


class UnsupportedScheme(ConstkitError):
    """Scheme/order combination the generators or closed forms do not cover."""


class SingularChannel(ConstkitError):
    """Detection attempted with a zero channel gain."""


class UndefinedPenalty(ConstkitError):
    """Rayleigh penalty requested against a zero AWGN error rate."""


class UndefinedEnergy(ConstkitError):
    """Energy per successful symbol requested at SER = 1."""


class InvalidInput(ConstkitError):
    """Malformed arguments to an optimizer or fitness function."""


class SchemaError(ConstkitError):
    """CSV input that does not match the expected column layout."""
