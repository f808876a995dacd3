"""Teacher clients.

Pipelines talk to a teacher through ``complete(prompt)``. Every call is
budget-checked and logged, so a finished run can be replayed from its call
log with zero live calls (ReplayTeacher), reproducing the records exactly.
The scriptable MockTeacher stands in for a live service in tests and at
desk scale.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path


class TeacherBudgetExceeded(Exception):
    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class MalformedTeacherOutput(Exception):
    pass


class ReplayMismatch(Exception):
    pass


@dataclass
class TeacherCall:
    index: int
    prompt: str
    response: str


class Teacher:
    """Base: budget enforcement + call logging around _respond()."""

    def __init__(self, budget: int = 10_000):
        self.budget = budget
        self.calls: list[TeacherCall] = []

    def complete(self, prompt: str) -> str:
        if len(self.calls) >= self.budget:
            raise TeacherBudgetExceeded(f"teacher budget of {self.budget} calls exhausted")
        response = self._respond(prompt)
        self.calls.append(TeacherCall(index=len(self.calls), prompt=prompt, response=response))
        return response

    def _respond(self, prompt: str) -> str:
        raise NotImplementedError

    def save_log(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for call in self.calls:
                handle.write(
                    json.dumps(
                        {"index": call.index, "prompt": call.prompt, "response": call.response},
                        ensure_ascii=False,
                    )
                    + "\n"
                )


@dataclass(frozen=True)
class TeacherRule:
    response: str
    match: str | None = None
    pattern: str | None = None

    def try_match(self, prompt: str):
        if self.match is not None:
            return self.match in prompt or None
        return re.search(self.pattern, prompt, re.DOTALL)


_SLOT = re.compile(r"\{(count|g:[A-Za-z_][A-Za-z0-9_]*)\}")


class MockTeacher(Teacher):
    """Ordered rules, first match wins; falls back to ``default``.

    Response templates support {count} (1-based per-rule fire count) and
    {g:<name>} (named groups from the rule's regex matcher), which is enough
    to script questions that echo document titles, alternating dialogue
    turns, and tool-command answers.
    """

    def __init__(self, rules: list[TeacherRule] | None = None, default: str = "", budget: int = 10_000):
        super().__init__(budget=budget)
        self.rules = list(rules or [])
        self.default = default
        self._fire_counts: dict[int, int] = {}

    @classmethod
    def from_dict(cls, data: dict, budget: int = 10_000) -> "MockTeacher":
        rules = [
            TeacherRule(response=r["response"], match=r.get("match"), pattern=r.get("pattern"))
            for r in data.get("rules", [])
        ]
        return cls(rules=rules, default=data.get("default", ""), budget=budget)

    @classmethod
    def from_file(cls, path: str | Path, budget: int = 10_000) -> "MockTeacher":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), budget=budget)

    def _respond(self, prompt: str) -> str:
        for i, rule in enumerate(self.rules):
            hit = rule.try_match(prompt)
            if hit:
                self._fire_counts[i] = self._fire_counts.get(i, 0) + 1
                return _render(rule.response, self._fire_counts[i], hit)
        self._fire_counts[-1] = self._fire_counts.get(-1, 0) + 1
        return _render(self.default, self._fire_counts[-1], None)


def _render(template: str, count: int, match) -> str:
    def sub(m: re.Match) -> str:
        slot = m.group(1)
        if slot == "count":
            return str(count)
        if isinstance(match, re.Match):
            try:
                return match.group(slot[2:]) or ""
            except IndexError:
                return ""
        return ""

    return _SLOT.sub(sub, template)


class ReplayTeacher(Teacher):
    """Serves responses from a saved call log, in order, verifying prompts."""

    def __init__(self, log: list[TeacherCall], budget: int | None = None):
        super().__init__(budget=budget if budget is not None else len(log))
        self._log = list(log)
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayTeacher":
        log = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    record = json.loads(line)
                    log.append(
                        TeacherCall(index=record["index"], prompt=record["prompt"], response=record["response"])
                    )
        return cls(log)

    def _respond(self, prompt: str) -> str:
        if self._cursor >= len(self._log):
            raise ReplayMismatch(f"call log exhausted after {self._cursor} calls")
        entry = self._log[self._cursor]
        if entry.prompt != prompt:
            raise ReplayMismatch(
                f"call {self._cursor}: prompt diverged from the logged run"
            )
        self._cursor += 1
        return entry.response
