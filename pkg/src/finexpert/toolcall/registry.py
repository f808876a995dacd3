"""Tool registry: maps command names to executors.

The registry is immutable after construction and shared read-only across
sessions.
"""

from __future__ import annotations

from types import MappingProxyType
from typing import Callable

from .. import fintools
from ..fintools.render import ToolOutcome

Executor = Callable[[str], ToolOutcome]


class UnknownTool(Exception):
    """Registry miss: only possible with a misconfigured registry."""


class ToolRegistry:
    def __init__(self, tools: dict[str, Executor]):
        self._tools = MappingProxyType(dict(tools))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._tools)

    def execute(self, name: str, args: str) -> ToolOutcome:
        try:
            executor = self._tools[name]
        except KeyError:
            raise UnknownTool(f"no executor registered for {name!r}") from None
        return executor(args)


def default_registry() -> ToolRegistry:
    """The four standard tools."""
    return ToolRegistry(
        {
            "Calculator": fintools.eval_expression,
            "EquationSolver": fintools.solve_equations_text,
            "Counter": fintools.count_samples,
            "ProbabilityTable": fintools.normal_cdf,
        }
    )
