"""Exception types shared across the package."""


class DiffGaborError(Exception):
    """Base class for all package errors."""


class InvalidInputError(DiffGaborError):
    """Malformed arguments: duplicate residues, bad shapes, zero generators, ..."""


class UnsupportedParametersError(DiffGaborError):
    """Parameters outside a construction's domain (non-prime q, composite Alltop N, ...)."""


class CatalogError(DiffGaborError):
    """The difference-set catalog file is missing or corrupt."""


class FactorizationError(DiffGaborError):
    """A linear system needed by a solver is inconsistent or degenerate."""


class ConfigurationError(DiffGaborError):
    """An experiment or CLI configuration cannot be satisfied."""
