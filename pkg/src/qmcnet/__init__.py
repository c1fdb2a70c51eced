"""Higher-order digital nets over GF(2) and worst-case error experiments in periodic Sobolev spaces."""

from .errors import CapacityError, ConfigError, DomainError, MatrixFileError, QmcError

__version__ = "0.1.0"

__all__ = ["CapacityError", "ConfigError", "DomainError", "MatrixFileError", "QmcError", "__version__"]
