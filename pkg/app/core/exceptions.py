"""Error types shared by the library and the command-line surface."""

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class MultisingError(Exception):
    """Base class for errors raised by the toolkit."""
    exit_code = 1


class ConfigError(MultisingError, ValueError):
    """Invalid or inconsistent run, study or ingestion configuration."""
    exit_code = EXIT_CONFIG


class DimensionLimitError(ConfigError):
    """Exact enumeration requested above the supported number of nodes."""


class DataError(MultisingError, ValueError):
    """Malformed input data or an ingestion rule that does not apply."""
    exit_code = EXIT_DATA


class NumericalError(MultisingError, ArithmeticError):
    """Optimizer non-convergence or an unusable numerical result."""
    exit_code = EXIT_NUMERICAL
