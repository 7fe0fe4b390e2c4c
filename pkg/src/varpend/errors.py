"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition or physical domain."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (step-size underflow, blowup, no bracket)."""
