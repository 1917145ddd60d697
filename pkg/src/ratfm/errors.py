"""Exception hierarchy shared across the toolkit.

All library errors derive from :class:`RatfmError`.  ``DatasetError`` and
``ConfigError`` subtrees map to the CLI exit codes 3 and 2 respectively.
"""


class RatfmError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(RatfmError):
    """Invalid experiment configuration."""


class DatasetError(RatfmError):
    """Problem with an input dataset."""


# dataset
class MalformedNameError(DatasetError):
    """Filename does not end in the three required integers."""


class EmptySeriesError(DatasetError):
    """Series file contains no values."""


class NonNumericTokenError(DatasetError):
    """Series file contains a token that is not a finite number."""


class SpanOutOfBoundsError(DatasetError):
    """Train split or anomaly span violates the series bounds."""


class SeriesTooShortError(RatfmError):
    """Input series shorter than the operation requires."""


class RegionTooShortWarning(UserWarning):
    """Region cannot hold a single window; an empty list is returned."""


# retrieval
class ZeroNormVectorError(RatfmError):
    """Similarity undefined for an all-zero vector."""


class LengthMismatchError(RatfmError):
    """Paired vectors must have equal (and sufficient) length."""


class EmptyPoolError(RatfmError):
    """No usable retrieval candidates."""


class InconsistentWindowLengthError(RatfmError):
    """Pool windows and query disagree on input length."""


class InvalidFractionError(ConfigError):
    """Subsampling fraction outside (0, 1]."""


# forecast
class BudgetExceedsAvailableError(RatfmError):
    """Context budget asks for more points than a window provides."""


class PeriodTooLongError(RatfmError):
    """Seasonal period exceeds the available input length."""


class SingularSystemError(RatfmError):
    """Unregularized normal equations are rank-deficient."""


class EmptyTrainingSetError(RatfmError):
    """No training contexts supplied."""


class ModeMismatchError(RatfmError):
    """Context layout incompatible with the forecaster's mode."""


# scoring / metrics
class InvalidWindowError(RatfmError):
    """Moving-average window must be at least 1."""


class NoPositiveMassError(RatfmError):
    """Ground-truth labels carry no positive mass."""


class EmptyInputError(RatfmError):
    """Operation requires at least one value."""


# harness
class InvalidSpecError(ConfigError):
    """Synthetic dataset specification is invalid."""
