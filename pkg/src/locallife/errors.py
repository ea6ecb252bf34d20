"""Exception hierarchy shared by every subsystem, mapped to stable CLI exit codes."""

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ENDPOINT = 3
EXIT_INTERNAL = 4


class LocalLifeError(Exception):
    """Base class; carries the exit code the CLI reports."""

    exit_code = EXIT_INTERNAL


class UsageError(LocalLifeError):
    """Bad command line, unknown config keys, missing files named on the command line."""

    exit_code = EXIT_USAGE


class DataError(LocalLifeError):
    """Invalid records, failed validation, broken referential integrity."""

    exit_code = EXIT_DATA


class EndpointError(LocalLifeError):
    """Transport failures and endpoint misconfiguration (e.g. unset auth variable)."""

    exit_code = EXIT_ENDPOINT

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class InternalError(LocalLifeError):
    """An internal invariant was violated; always a bug, never user error."""

    exit_code = EXIT_INTERNAL
