"""Exception hierarchy shared across the package.

Every error carries a short machine-readable code; the CLI prints it as a
single line (`error code=<code> message=<...>`) and exits nonzero.
"""

from __future__ import annotations


class StratumError(Exception):
    """Base class for all expected failures."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DataError(StratumError):
    """Malformed or inconsistent input data."""

    code = "data_invalid"


class ConfigError(StratumError):
    """Invalid configuration or parameter values."""

    code = "config_invalid"
