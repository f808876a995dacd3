"""The four calculation tools: expression calculator, equation solver,
sample counter, and probability table.

All operations are pure functions from text input to a ToolOutcome, safe for
unrestricted concurrent use.
"""

from .errors import (
    Inconsistent,
    MathError,
    NonlinearTerm,
    ParseError,
    ToolError,
    Underdetermined,
)
from .expression import eval_expression, parse_expression, to_text
from .linear import solve_linear_system
from .normal import normal_cdf, phi
from .render import ToolOutcome, render_number, render_probability
from .samples import count_samples, parse_samples


def solve_equations_text(src: str) -> ToolOutcome:
    """Solve an equation system given as one string, equations separated by
    ';' or newlines."""
    equations = [eq.strip() for eq in src.replace("\n", ";").split(";") if eq.strip()]
    return solve_linear_system(equations)


__all__ = [
    "ToolError",
    "ParseError",
    "MathError",
    "NonlinearTerm",
    "Inconsistent",
    "Underdetermined",
    "ToolOutcome",
    "eval_expression",
    "parse_expression",
    "to_text",
    "solve_linear_system",
    "solve_equations_text",
    "count_samples",
    "parse_samples",
    "normal_cdf",
    "phi",
    "render_number",
    "render_probability",
]
