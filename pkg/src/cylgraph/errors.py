"""Exception hierarchy. CLI exit codes hang off these classes."""


class CylGraphError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(CylGraphError, ValueError):
    """Parameters violate a construction or sweep constraint."""

    exit_code = 2


class DomainError(CylGraphError, ValueError):
    """An argument lies outside the domain where an operation is defined."""

    exit_code = 2


class InvalidTruncation(DomainError):
    """Truncation depth not below the cylindrical width."""


class ConstructionError(CylGraphError):
    """Net or cell construction produced a degenerate object."""

    exit_code = 2


class SolverError(CylGraphError, RuntimeError):
    """Eigensolver failed to converge or was given unusable input."""

    exit_code = 3

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
