"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
AnalysisError -> 3.
"""


class ConfigError(Exception):
    """A run configuration is invalid or has unmet data dependencies."""


class DataError(Exception):
    """An input file or payload violates its schema or an invariant."""


class AnalysisError(Exception):
    """A statistical computation cannot proceed on the given data."""


class EmptyQueryError(DataError):
    """A query is empty (or all punctuation); the measurement is skipped."""
