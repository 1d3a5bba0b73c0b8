"""Shared exception types."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed its configured enumeration budget.

    Raised instead of silently truncating; carries the size that was
    requested and the cap that refused it.
    """

    def __init__(self, message: str, *, needed: int, cap: int):
        super().__init__(message)
        self.needed = needed
        self.cap = cap


class EnumerationCapExceeded(ResourceLimitError):
    """Subset enumeration would touch more combinations than allowed."""


class BudgetExceeded(ResourceLimitError):
    """Lattice scan would touch more candidate points than allowed."""


class IterationError(RuntimeError):
    """A fixed-point iteration left its domain (e.g. negative radicand)."""
