"""Probability table: cumulative standard normal distribution Phi(x).

Phi is evaluated through the complementary error function, accurate to well
below the 1e-7 contract everywhere. Results render with 4 decimals, matching
printed probability tables.
"""

from __future__ import annotations

import math

from .errors import ParseError
from .render import ToolOutcome, outcome_from_probability

_SQRT2 = math.sqrt(2.0)


def phi(x: float) -> float:
    """Cumulative standard normal distribution at x."""
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_cdf(src: str | float) -> ToolOutcome:
    """Evaluate Phi at a number given as text (or already parsed)."""
    if isinstance(src, str):
        text = src.strip().replace("−", "-")  # tolerate the unicode minus
        try:
            x = float(text)
        except ValueError as exc:
            raise ParseError(f"not a number: {src!r}") from exc
    else:
        x = float(src)
    if not math.isfinite(x):
        raise ParseError(f"input must be finite: {src!r}")
    return outcome_from_probability(phi(x))
