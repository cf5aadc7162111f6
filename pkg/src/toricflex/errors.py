"""Exception types shared by all modules."""


class ToricflexError(Exception):
    """Base class for engine errors."""


class DomainError(ToricflexError, ValueError):
    """Input violates a precondition (degenerate cone, singular point, ...)."""


class CapabilityError(ToricflexError):
    """Input is valid but outside what the engine supports (rank bound, ...)."""


class FieldExtensionError(ToricflexError, ArithmeticError):
    """An exact computation needs a root that does not exist over the rationals."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"[{step}] {message}")
        self.step = step


class InconsistencyError(ToricflexError, AssertionError):
    """An internal check that should be impossible to fail has failed."""


class InfeasibleError(ToricflexError):
    """A construction could not be completed with the supplied data."""
