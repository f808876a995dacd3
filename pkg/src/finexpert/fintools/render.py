"""Numeric rendering for tool outcomes.

Rendered values get spliced back into generated text, so the format has to be
stable and re-parseable: at most 12 significant digits, no trailing zeros,
integers without a decimal point. Probability-table values use the classic
4-decimal table convention instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def render_number(value: float) -> str:
    """Render ``value`` to at most 12 significant digits."""
    if value == 0:
        return "0"
    text = f"{value:.12g}"
    # %g keeps a redundant "+" and zero-padded exponents ("1e+06"); trim both.
    if "e" in text:
        mantissa, exponent = text.split("e")
        exp = int(exponent)
        text = f"{mantissa}e{exp}"
    return text


def render_probability(value: float) -> str:
    """Render a cumulative probability to 4 decimals."""
    return f"{value:.4f}"


def render_solution(solution: dict[str, float]) -> str:
    """Render a solution map as ``x=2, y=1`` in variable order."""
    return ", ".join(f"{name}={render_number(v)}" for name, v in solution.items())


@dataclass(frozen=True)
class ToolOutcome:
    """Result of one tool execution.

    ``value`` is the raw result (float, int, or variable->float map);
    ``rendered`` is the exact text spliced into a transcript.
    """

    value: float | int | dict[str, float]
    rendered: str
    meta: dict = field(default_factory=dict, compare=False)


def outcome_from_number(value: float) -> ToolOutcome:
    return ToolOutcome(value=value, rendered=render_number(value))


def outcome_from_count(count: int) -> ToolOutcome:
    return ToolOutcome(value=count, rendered=str(count))


def outcome_from_probability(value: float) -> ToolOutcome:
    return ToolOutcome(value=value, rendered=render_probability(value))


def outcome_from_solution(solution: dict[str, float]) -> ToolOutcome:
    return ToolOutcome(value=solution, rendered=render_solution(solution))
