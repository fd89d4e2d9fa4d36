"""Exception hierarchy.

Every failure mode raised by this package derives from :class:`CointkitError`
so callers can catch one base class at the boundary. The subclasses are named
for the contract they enforce, not for the module that raises them; several
are shared across modules.
"""


class CointkitError(Exception):
    """Base class for all errors raised by cointkit."""


class SeriesError(CointkitError):
    """Invalid construction or use of an annual series."""


class GapError(SeriesError):
    """Years are not consecutive integers."""


class EmptyOverlap(SeriesError):
    """An operation on multiple series found no common years."""


class NonPositiveValue(SeriesError):
    """A log or growth transform hit a value <= 0."""


class TooShort(SeriesError):
    """A series has fewer observations than the operation requires."""


class ZeroVariance(SeriesError):
    """A series is constant where variation is required."""


class OutOfWindow(SeriesError):
    """A requested year lies outside the dataset window."""


class InsufficientFit(SeriesError):
    """Not enough non-missing points to fit an imputation trend."""


class SchemaMismatch(CointkitError):
    """A CSV or API payload does not match the declared schema."""


class ParseError(SchemaMismatch):
    """A payload could not be parsed at all."""


class HttpError(CointkitError):
    """An HTTP request failed after retries."""


class EmptyResponse(CointkitError):
    """An API response contained no observations."""


class NotStandardized(CointkitError):
    """An index builder expected standardized inputs."""


class DegenerateMatrix(CointkitError):
    """A matrix is rank deficient where full rank is required."""


class MissingWeight(CointkitError):
    """A weighted combination is missing a weight for some component."""


class BaseYearOutOfWindow(CointkitError):
    """A rebasing year is not inside the data window."""


class RankDeficient(CointkitError):
    """Design matrix is not full column rank."""

    def __init__(self, message, columns=None):
        super().__init__(message)
        self.columns = tuple(columns) if columns is not None else ()


class SingularRegression(CointkitError):
    """A testing regression could not be solved (degenerate input series)."""


class TooFewObservations(CointkitError):
    """n is too small for the requested estimator."""


class SampleTooSmall(TooFewObservations):
    """The sample cannot support the requested lag/lead structure."""


class InvalidLag(CointkitError):
    """A lag or truncation parameter is out of range."""


class UnknownName(CointkitError):
    """A referenced variable name does not exist in the dataset."""


class TooFewReps(CointkitError):
    """Bootstrap or Monte Carlo replication count is too small."""


class SubsampleTooSmall(CointkitError):
    """A split leaves a subsample with fewer observations than parameters."""


class IntegrationOrderViolation(CointkitError):
    """A precondition on integration order is not met."""


class UnsupportedCase(CointkitError):
    """An unsupported deterministic case or model variant was requested."""


class NonConverging(CointkitError):
    """An adjustment coefficient implies a non-converging process."""


class MissingRule(CointkitError):
    """A scenario does not provide a path rule for a required variable."""


class MissingResults(CointkitError):
    """A classification or report step is missing required inputs."""


class NonInvertible(CointkitError):
    """ARMA parameters lie outside the stationary or invertible region."""


class GridExhausted(CointkitError):
    """No candidate on a model grid produced a valid fit."""


class OptimFailed(CointkitError):
    """A numerical optimizer failed to produce a usable optimum."""


class NoConvergence(CointkitError):
    """An iterative solver hit its iteration cap before its tolerance."""


class DegenerateSplit(CointkitError):
    """A tree or validation split has no usable variation."""


class ConfigError(CointkitError):
    """Configuration file is invalid; message carries the key path."""


class StageError(CointkitError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


class IoError(CointkitError):
    """A file read or write failed."""
