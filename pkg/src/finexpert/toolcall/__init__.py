"""Mid-stream tool-call detection, execution and splicing."""

from .command import ARROW, HOLDBACK_CAP, TOOL_NAMES, SpliceEvent, ToolCommand
from .loop import LoopLimits, LoopResult, LoopStep, iter_tool_loop, run_tool_loop
from .registry import ToolRegistry, UnknownTool, default_registry
from .scanner import StreamScanner
from .splice import execute_and_splice, parse_embedded, splice_text

__all__ = [
    "ARROW",
    "HOLDBACK_CAP",
    "TOOL_NAMES",
    "SpliceEvent",
    "ToolCommand",
    "LoopLimits",
    "LoopResult",
    "LoopStep",
    "StreamScanner",
    "ToolRegistry",
    "UnknownTool",
    "default_registry",
    "execute_and_splice",
    "iter_tool_loop",
    "parse_embedded",
    "run_tool_loop",
    "splice_text",
]
