"""Command execution and result splicing."""

from __future__ import annotations

from ..fintools.errors import ToolError
from .command import SpliceEvent, ToolCommand
from .registry import ToolRegistry
from .scanner import StreamScanner


def execute_and_splice(cmd: ToolCommand, registry: ToolRegistry) -> SpliceEvent:
    """Run a scanned command; the returned event's ``rendered`` text goes
    between the arrow and the closing ']'. Tool failures become an inline
    ``ERROR: <kind>`` so generation can continue."""
    try:
        outcome = registry.execute(cmd.tool, cmd.args)
        return SpliceEvent(command=cmd, outcome=outcome, error_kind=None, rendered=outcome.rendered)
    except ToolError as exc:
        return SpliceEvent(command=cmd, outcome=None, error_kind=exc.kind, rendered=f"ERROR: {exc.kind}")


def splice_text(event: SpliceEvent) -> str:
    """Full inline form of an executed command: ``[Tool(args)→result]``."""
    return event.command.canonical() + event.rendered + "]"


def parse_embedded(text: str) -> list[tuple[ToolCommand, str]]:
    """Recover (command, result text) pairs from completed inline commands.

    Inverse of splice_text: parse_embedded(splice_text(ev)) recovers the
    command and its rendered result exactly. Commands missing the closing
    ']' are ignored.
    """
    found: list[tuple[ToolCommand, str]] = []
    rest = text
    while rest:
        scanner = StreamScanner()
        _, pending = scanner.scan_chunk(rest)
        if pending is None:
            break
        carry = scanner.discard_tail()
        closing = carry.find("]")
        if closing == -1:
            break
        found.append((pending, carry[:closing]))
        rest = carry[closing + 1 :]
    return found
