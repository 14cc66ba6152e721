"""Shared exception types."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class SchemaError(ValidationError):
    """Serialized payload does not match the expected schema."""


class NumericError(RuntimeError):
    """A numeric routine failed (singular factorization, solver breakdown)."""
