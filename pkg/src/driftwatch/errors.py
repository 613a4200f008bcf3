"""Exception types shared across the package."""


class DriftwatchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DriftwatchError):
    """Invalid configuration file or parameter value."""


class DataError(DriftwatchError):
    """Unreadable or structurally invalid input data."""
