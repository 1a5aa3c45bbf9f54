"""Exception hierarchy shared by every cosyflat module."""

from __future__ import annotations


class CosyflatError(Exception):
    """Base class for all errors raised by the package."""


class DivisionByZero(CosyflatError, ZeroDivisionError):
    pass


class DomainError(CosyflatError, ValueError):
    pass


class ParseError(CosyflatError, ValueError):
    """Malformed expression source.

    ``offset`` is the byte offset of the offending token and ``expected``
    the set of token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class SingularMetric(CosyflatError, ArithmeticError):
    pass


class DegenerateFrame(CosyflatError, ArithmeticError):
    pass


class DimensionError(CosyflatError, ValueError):
    pass


class DegenerateA(CosyflatError, ArithmeticError):
    """The shape operator is (numerically) zero, so no adapted frame is unique."""


class PreconditionFailed(CosyflatError):
    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"precondition failed: {hypothesis}" + (f" ({detail})" if detail else ""))


class LeftAdmissibleRegion(CosyflatError):
    def __init__(self, message: str, last_valid_z: float):
        self.last_valid_z = last_valid_z
        super().__init__(f"{message}; last valid z = {last_valid_z!r}")


class InterpolationRange(CosyflatError, ValueError):
    pass


class ConfigError(CosyflatError, ValueError):
    pass


class BuildError(CosyflatError):
    pass


class CheckFailure(CosyflatError):
    pass
