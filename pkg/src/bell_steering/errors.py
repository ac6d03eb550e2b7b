"""
Exceptions raised by the Bell-diagonal steering toolkit.

Validation problems stay in the ``ValueError`` family so callers that
already guard numeric input with ``except ValueError`` keep working.
"""

from __future__ import annotations

from typing import Any, Optional


class InvalidStateError(ValueError):
    """A correlation triple that lies outside the Bell-diagonal tetrahedron."""


class PreconditionError(ValueError):
    """An operation was called with arguments outside its domain."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    Attributes:
        partial: Whatever the solver had computed when it stopped
    """

    def __init__(self, message: str, partial: Optional[Any] = None) -> None:
        super().__init__(message)
        self.partial = partial
