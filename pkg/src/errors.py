"""Exception taxonomy shared by the solver packages.

Structural problems (bad input, malformed generators, budgets) derive from
``ValueError`` so callers can treat them like any other argument error.
Mathematical negative results derive from ``RuntimeError`` through
:class:`CriteriaViolation`; the command line maps them to a dedicated exit
code.
"""
from __future__ import annotations

from typing import Optional


class InvalidGeneratorError(ValueError):
    """Raised when a generator breaks a structural invariant."""

    def __init__(self, message: str, *, row: Optional[int] = None) -> None:
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class HorizonTooDeepError(ArithmeticError):
    """Raised when the survival mass falls below the representable floor."""


class TruncationBudgetError(ValueError):
    """Raised when a truncated state space would exceed the state budget."""

    def __init__(self, required: int, budget: int) -> None:
        super().__init__(
            f"state space needs {required} states but the budget is {budget}; "
            "lower the cap or raise the budget"
        )
        self.required = required
        self.budget = budget


class CriteriaViolation(RuntimeError):
    """A certification step produced a negative verdict.

    ``verdict`` is a short machine readable code (``A1-FAIL``,
    ``QSD-NOT-UNIQUE``, ``A2-EXTEND-TMAX``) copied into run manifests.
    """

    def __init__(self, message: str, *, verdict: str) -> None:
        super().__init__(message)
        self.verdict = verdict
