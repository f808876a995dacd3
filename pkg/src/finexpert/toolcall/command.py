"""Tool-call command types.

A command appears inline in generated text as ``[Tool(args)→result]``. The
scanner detects the ``[Tool(args)→`` head; execution appends the rendered
result and the closing bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..fintools.render import ToolOutcome

TOOL_NAMES = ("Calculator", "EquationSolver", "Counter", "ProbabilityTable")
ARROW = "→"
ASCII_ARROW = "->"
# a candidate longer than this without an arrow gets flushed as plain text
HOLDBACK_CAP = 512


@dataclass(frozen=True)
class ToolCommand:
    tool: str
    args: str
    span: tuple[int, int]  # (offset of '[', offset of the arrow) in the emission
    raw: str = ""  # exact emitted text "[Tool(args)→" (arrow as emitted)

    def canonical(self) -> str:
        """Command head re-rendered with the canonical arrow."""
        return f"[{self.tool}({self.args}){ARROW}"


@dataclass
class SpliceEvent:
    """One executed command and what was spliced after its arrow."""

    command: ToolCommand
    outcome: ToolOutcome | None
    error_kind: str | None
    rendered: str  # text spliced between the arrow and ']'
    resumed_at: int = -1  # transcript offset just past the ']'

    @property
    def ok(self) -> bool:
        return self.error_kind is None
