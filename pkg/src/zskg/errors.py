"""Exception hierarchy shared across the toolkit.

Each class carries the process exit code the CLI maps it to:
ConfigError -> 2, DataError -> 3, DivergenceError -> 4.
"""


class ZskgError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(ZskgError):
    """Invalid or infeasible configuration (unknown keys, bad values)."""

    exit_code = 2


class DataError(ZskgError):
    """Dataset validation failure (missing files, dangling ids, malformed lines)."""

    exit_code = 3


class DivergenceError(ZskgError):
    """Training produced a non-finite quantity."""

    exit_code = 4


class NonFiniteError(DivergenceError):
    """A tensor acquired NaN or Inf entries."""
