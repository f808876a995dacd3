"""Sample counter: counts the elements of a number list."""

from __future__ import annotations

import math

from .errors import ParseError
from .render import ToolOutcome, outcome_from_count


def parse_samples(src: str) -> list[float]:
    """Parse a bracketed or comma-separated number list."""
    text = src.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    text = text.strip()
    if not text:
        return []
    values = []
    for part in text.replace("，", ",").split(","):
        part = part.strip()
        if not part:
            raise ParseError(f"empty element in sample list: {src!r}")
        try:
            value = float(part)
        except ValueError as exc:
            raise ParseError(f"not a number: {part!r}") from exc
        if not math.isfinite(value):
            raise ParseError(f"non-finite sample: {part!r}")
        values.append(value)
    return values


def count_samples(src: str) -> ToolOutcome:
    """Count the samples in a number list given as text."""
    return outcome_from_count(len(parse_samples(src)))
