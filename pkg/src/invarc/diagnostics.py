"""Source spans and error types shared across the pipeline.

All user-facing diagnostics render as ``file:line:col: severity: message``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Span:
    """Half-open region of source text, 1-based lines and columns."""

    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __post_init__(self):
        if self.end_line == 0:
            object.__setattr__(self, "end_line", self.line)
            object.__setattr__(self, "end_col", self.col)

    def __str__(self):
        return f"{self.line}:{self.col}"


class InvarcError(Exception):
    """Base class for all pipeline errors."""

    severity = "error"

    def __init__(self, message, span=None):
        self.message = message
        self.span = span
        super().__init__(self.render())

    def render(self, filename="<input>"):
        loc = f"{filename}:{self.span}" if self.span else filename
        return f"{loc}: {self.severity}: {self.message}"


class ParseFailure(InvarcError):
    """Syntax error: carries the offending span and the expected-token set."""

    def __init__(self, message, span=None, expected=()):
        self.expected = tuple(sorted(expected))
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(message, span)


class RejectedConstruct(ParseFailure):
    """A construct deliberately outside the supported language subset."""

    def __init__(self, kind, span=None):
        self.kind = kind
        super().__init__(f"unsupported construct: {kind}")
        self.span = span


class FrontendTypeError(InvarcError):
    """Unresolved identifier or ill-typed expression."""


class NormalizeError(InvarcError):
    """Failure while inlining or lowering to simple assignments."""


class InlineDepthExceeded(NormalizeError):
    pass


class UnsupportedExpression(NormalizeError):
    pass


class AnalysisError(InvarcError):
    """Errors from pollution / abstraction stages."""


class NotAPointer(AnalysisError):
    pass


class ItemNotFound(AnalysisError):
    pass


class InconsistentInput(AnalysisError):
    pass


class EncodeError(InvarcError):
    """Translation to solver form failed."""


class UnsupportedType(EncodeError):
    pass


class UnboundVariable(EncodeError):
    pass


class UnsupportedOperator(EncodeError):
    pass


class UnknownSymbol(EncodeError):
    pass


class SolverNotFound(InvarcError):
    pass


class ProtocolError(InvarcError):
    """Solver produced output we could not interpret."""


class StepBudgetExceeded(InvarcError):
    """Interpreter ran out of steps while enumerating inputs."""
