"""Exception and warning types shared across the package.

Every precondition failure raises one of the exceptions below rather than
letting a bare ValueError or numpy error escape, so callers can tell a bad
argument from a numerical breakdown.
"""

from __future__ import annotations


class TeamfuseError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TeamfuseError, ValueError):
    """An argument violates a documented precondition."""


class SingularModelError(TeamfuseError, ArithmeticError):
    """A model matrix could not be factorized even after jitter."""


class WeightUnderflowError(TeamfuseError, ArithmeticError):
    """Every sample weight underflowed to zero in log space.

    Carries the largest raw log-weight seen so the caller can judge how
    far below representable range the ensemble fell.
    """

    def __init__(self, max_raw_log_weight: float):
        self.max_raw_log_weight = float(max_raw_log_weight)
        super().__init__(
            "all sample weights underflowed; max raw log-weight was "
            f"{self.max_raw_log_weight:.6g}"
        )


class PlacementError(TeamfuseError, RuntimeError):
    """Crowd agents could not be placed without overlap at the requested density."""


class InvalidComparisonError(TeamfuseError, ValueError):
    """Two episode records cannot be compared (different scenario or seed)."""


class ConfigError(TeamfuseError, ValueError):
    """A run configuration file is malformed or inconsistent.

    ``field`` holds a dotted path to the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        prefix = f"{field}: " if field else ""
        super().__init__(prefix + message)


class RankDeficiencyWarning(RuntimeWarning):
    """A covariance factorization fell back to an eigenvalue pseudo-inverse."""


class WeightRenormalizationWarning(RuntimeWarning):
    """Mixture weights underflowed and were reset to uniform."""
