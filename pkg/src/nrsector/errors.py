"""Exception types raised across the package."""


class NRSectorError(Exception):
    """Base class for all package errors."""


class SizeError(NRSectorError, ValueError):
    """Operands do not have matching dimensions."""


class DomainError(NRSectorError, ValueError):
    """An argument lies outside the domain of the operation."""


class PartitionError(NRSectorError, ValueError):
    """A block partition of a measure space is malformed."""


class ConstructionError(NRSectorError, ValueError):
    """A generator could not be built from the given data."""


class SamplingError(NRSectorError, RuntimeError):
    """Rejection sampling ran out of attempts."""


class NumericError(NRSectorError, ArithmeticError):
    """A linear solve or factorisation broke down."""
