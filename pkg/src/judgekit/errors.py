"""Exception hierarchy. Undefined statistics are typed errors, never NaN or 0.0."""


class JudgekitError(Exception):
    """Base class for all toolkit errors."""

    tag = "error"


class InvalidScaleError(JudgekitError):
    """Scale or weighting parameters are unusable (e.g. fewer than 2 categories)."""

    tag = "invalid-scale"


class ParseError(JudgekitError):
    """Input file is malformed; message carries line number and offending value."""

    tag = "parse-error"


class DataIntegrityError(JudgekitError):
    """Structurally parseable input that violates integrity rules (duplicates, misalignment)."""

    tag = "data-integrity"


class UnknownRaterError(DataIntegrityError):
    tag = "unknown-rater"


class InfeasibleConstructionError(JudgekitError):
    """Requested synthetic construction cannot be realized (a cell count went negative)."""

    tag = "infeasible-construction"


class StatisticError(JudgekitError):
    """Base for 'the requested statistic is undefined on this input'."""

    tag = "undefined-statistic"


class InsufficientDataError(StatisticError):
    tag = "insufficient-data"


class DegenerateDistributionError(StatisticError):
    tag = "degenerate-distribution"


class UndefinedCorrelationError(StatisticError):
    tag = "undefined-correlation"


class NoSignalError(StatisticError):
    tag = "no-signal"


class UnsupportedDesignError(StatisticError):
    tag = "unsupported-design"
