"""Package exceptions."""


class LppError(Exception):
    pass


class NoPath(LppError):
    """Target unreachable (cone or mask forbids every path)."""


class BudgetExceeded(LppError):
    """Brute-force enumeration would visit more paths than the budget allows."""


class InvalidParams(LppError):
    """Parameters out of range for the requested computation."""


class InsufficientData(LppError):
    """Not enough usable points for a fit."""


class DomainError(LppError):
    """Argument outside the domain of a profile or interpolation."""


class ParseError(LppError):
    """Config document is not valid JSON."""


class ValidationError(LppError):
    """Config document violates the schema (missing, unknown, or out-of-range key)."""


class IoError(LppError):
    """A records or summary file could not be read or written."""


class SchemaError(LppError):
    """A records file carries an incompatible schema version or malformed record."""
