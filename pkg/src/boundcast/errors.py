"""Exception hierarchy shared across the package.

Three branches map onto the CLI exit codes: configuration problems (1),
data problems (2), numeric failures (3).
"""


class BoundcastError(Exception):
    """Base class for all package errors."""


class ConfigError(BoundcastError):
    """Invalid configuration or arguments."""


class DataError(BoundcastError):
    """Problems with input data (files, series, dimensions)."""


class NumericError(BoundcastError):
    """Numeric failures inside solvers or predictors."""


# -- data errors --------------------------------------------------------------

class SeriesTooShort(DataError):
    """Series cannot support the requested embedding order and horizon."""


class DimensionMismatch(DataError):
    """Vector or matrix dimensions do not line up."""


class InsufficientData(DataError):
    """Fewer training pairs than regressor dimensions."""


class NonPositiveValue(DataError):
    """log10 transform applied to a value <= 0."""


class DegenerateTrend(DataError):
    """Trend fit requested with fewer than two training points."""


class EmptySplit(DataError):
    """Train/test split would leave one side empty."""


class ParseError(DataError):
    """CSV cell failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class EmptySeries(DataError):
    """CSV contained no data rows."""


class ZeroActual(DataError):
    """MAPE undefined: an actual value is zero."""


class ZeroDenominator(DataError):
    """SMAPE undefined: actual and predicted are both zero."""


# -- numeric errors ------------------------------------------------------------

class InfeasibleError(NumericError):
    """The constraint system has no solution."""


class UnboundedError(NumericError):
    """The optimization problem is unbounded below."""


class AllWeightsZero(NumericError):
    """Every kernel weight vanished (bandwidth too small for the data)."""


class SingularLocalFit(NumericError):
    """Weighted normal equations of a local fit are singular."""
