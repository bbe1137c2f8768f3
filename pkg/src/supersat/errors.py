"""Exception types shared across the package."""

from __future__ import annotations


class UsageError(ValueError):
    """Invalid arguments or violated preconditions."""


class BudgetExceeded(RuntimeError):
    """A search hit its node-expansion cap before certifying a value.

    ``lower`` and ``upper`` bracket the quantity being computed.
    """

    def __init__(self, message: str, lower: int, upper: int, nodes: int = 0):
        super().__init__(f"{message} (bracket [{lower}, {upper}] after {nodes} nodes)")
        self.lower = lower
        self.upper = upper
        self.nodes = nodes


class InfeasibleConstruction(ValueError):
    """A construction cannot be realised for the requested parameters."""


class SandwichInconsistency(AssertionError):
    """A certified lower bound exceeded a certified upper bound.

    This always indicates a bug, never a property of the input.
    """
