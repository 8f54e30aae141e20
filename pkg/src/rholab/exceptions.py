"""
Exception types raised by rholab.

Numerical non-convergence and probe starvation are reported through result
objects, not exceptions.
"""

from __future__ import annotations

from typing import Any, Optional


class RholabError(Exception):
    """Base class for rholab errors."""


class DimensionMismatchError(RholabError, ValueError):
    """A vector does not live in the space of the norm it is used with."""

    def __init__(self, expected: int, got: int, what: str = "vector") -> None:
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class ZeroVectorError(RholabError, ValueError):
    """The operation is undefined at the origin."""


class NonSmoothPointError(RholabError, ValueError):
    """The norm is not Gateaux differentiable at the requested point."""

    def __init__(self, message: str, witness: Optional[Any] = None, gap: float = 0.0) -> None:
        self.witness = witness
        self.gap = gap
        super().__init__(message)


class ConfigError(RholabError, ValueError):
    """Suite configuration could not be parsed or validated."""

    def __init__(self, message: str, location: str = "") -> None:
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(f"{prefix}{message}")
