"""Error types shared by the four calculation tools.

Every failure carries a short ``kind`` (the class name) which is what gets
spliced into a transcript as ``ERROR: <kind>]`` when a tool call fails
mid-generation.
"""


class ToolError(Exception):
    """Base class for calculation tool failures."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class ParseError(ToolError):
    """Malformed tool input. ``position`` is a character offset when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position

    def __str__(self) -> str:
        base = super().__str__()
        if self.position is not None:
            return f"{base} (at position {self.position})"
        return base


class MathError(ToolError):
    """Arithmetic failure: division by zero, domain error, non-finite result."""


class NonlinearTerm(ToolError):
    """Equation system contains a term that is not linear in its variables."""


class Inconsistent(ToolError):
    """Equation system admits no solution."""


class Underdetermined(ToolError):
    """Equation system admits infinitely many solutions."""
