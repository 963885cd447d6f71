"""
Error taxonomy for the recovery toolkit.

Every error is a ValueError so callers that only care about bad input can
catch that; management commands map RecoveryError to exit status 2.
"""


class RecoveryError(ValueError):
    """Base class for all toolkit errors."""


class RankDeficient(RecoveryError):
    """A matrix that must have full column rank does not, at rank_tol."""


class NotSymmetric(RecoveryError):
    pass


class ZeroColumn(RecoveryError):
    pass


class NotNormalized(RecoveryError):
    """A dictionary column deviates from unit norm and normalization was not requested."""


class InvalidParams(RecoveryError):
    """Parameters fall outside the domain of a construction or configuration."""


class NoCandidates(RecoveryError):
    """The current support already holds every column."""


class EpsilonSearchFailed(RecoveryError):
    pass


class TooLarge(RecoveryError):
    """An exhaustive enumeration would exceed the configured subset guard."""


class SparkTooSmall(RecoveryError):
    pass


class OutOfDomain(RecoveryError):
    """An analytic bound was evaluated outside the domain of its formula."""


class Infeasible(RecoveryError):
    pass


class KernelTooLarge(RecoveryError):
    pass


class UnknownClaim(RecoveryError):
    pass


class ScenarioError(RecoveryError):
    """A scenario file could not be parsed or validated."""
