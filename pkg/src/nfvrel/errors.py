"""Exception types shared across the package."""


class NfvRelError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(NfvRelError):
    """Array shapes or index ranges are inconsistent with the instance."""


class CapacityDeficit(NfvRelError):
    """Total controller capacity cannot cover all regular VNFs."""


class ProbabilityOutOfRange(NfvRelError):
    """A probability parameter lies outside [0, 1]."""


class EnumerationLimitExceeded(NfvRelError):
    """The exact computation would enumerate too many states."""


class NonIntegerReplication(NfvRelError):
    """The balanced-replication bound requires r*L to be an integer."""


class NodeLimitExceeded(NfvRelError):
    """Branch-and-bound node budget exhausted before proving optimality."""
