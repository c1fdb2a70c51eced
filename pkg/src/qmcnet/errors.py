"""Exception types shared across the package."""

from __future__ import annotations


class QmcError(Exception):
    """Base class for all package errors."""


class DomainError(QmcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(QmcError):
    """A request would exceed a precision cap or an enumeration guard."""


class ConfigError(QmcError):
    """Invalid run configuration or unusable input file."""


class MatrixFileError(ConfigError):
    """Malformed generating-matrix file; carries the offending line number."""

    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")
