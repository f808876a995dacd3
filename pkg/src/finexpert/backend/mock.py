"""Deterministic scripted backend.

A MockScript is an ordered rule list; the first rule whose matcher hits the
prompt wins, and a mandatory default covers everything else. Responses are
templates with two kinds of slots:

  {count}       1-based number of times this rule has fired (per backend)
  {g:<name>}    named group captured by the rule's regex matcher

Identical (prompt, adapter, script) always produces an identical emission;
{count} only varies across repeated firings, which is itself deterministic
for a fixed call sequence.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .base import Completion, GenerationBackend, GenerationRequest, StreamItem

_SLOT = re.compile(r"\{(count|g:[A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class MockRule:
    response: str
    match: str | None = None  # substring matcher
    pattern: str | None = None  # regex matcher (search)

    def __post_init__(self):
        if (self.match is None) == (self.pattern is None):
            raise ValueError("rule needs exactly one of 'match' or 'pattern'")

    def try_match(self, prompt: str) -> re.Match | bool | None:
        if self.match is not None:
            return self.match in prompt or None
        return re.search(self.pattern, prompt, re.DOTALL)


@dataclass
class MockScript:
    rules: list[MockRule] = field(default_factory=list)
    default: str = ""

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "MockScript":
        rules = [
            MockRule(response=r["response"], match=r.get("match"), pattern=r.get("pattern"))
            for r in data.get("rules", [])
        ]
        return cls(rules=rules, default=data.get("default", ""))


def _render(template: str, count: int, match) -> str:
    def sub(m: re.Match) -> str:
        slot = m.group(1)
        if slot == "count":
            return str(count)
        name = slot[2:]
        if isinstance(match, re.Match):
            try:
                return match.group(name) or ""
            except IndexError:
                return ""
        return ""

    return _SLOT.sub(sub, template)


class MockBackend(GenerationBackend):
    """Scripted backend; one script per adapter id, '' selects the default."""

    def __init__(
        self,
        scripts: dict[str, MockScript] | None = None,
        default_script: MockScript | None = None,
        chunk_size: int = 8,
    ):
        self.scripts = dict(scripts or {})
        self.default_script = default_script or MockScript(default="")
        self.chunk_size = max(1, chunk_size)
        self._counts: dict[tuple[str, int], int] = {}
        self._lock = threading.Lock()

    def _script_for(self, adapter_id: str) -> MockScript:
        return self.scripts.get(adapter_id, self.default_script)

    def generate_stream(self, request: GenerationRequest) -> Iterator[StreamItem]:
        adapter_id = request.adapter.id if request.adapter else ""
        script = self._script_for(adapter_id)

        text = script.default
        rule_index = -1
        match = None
        for i, rule in enumerate(script.rules):
            hit = rule.try_match(request.prompt)
            if hit:
                rule_index = i
                match = hit
                text = rule.response
                break

        with self._lock:
            key = (adapter_id, rule_index)
            self._counts[key] = self._counts.get(key, 0) + 1
            count = self._counts[key]
        text = _render(text, count, match)

        finish_reason = "stop"
        cut = len(text)
        for stop in request.stop_sequences:
            idx = text.find(stop)
            if idx != -1 and idx < cut:
                cut = idx
        text = text[:cut]
        # mock token = one character
        if len(text) > request.max_tokens:
            text = text[: request.max_tokens]
            finish_reason = "length"

        for start in range(0, len(text), self.chunk_size):
            yield text[start : start + self.chunk_size]
        yield Completion(
            finish_reason=finish_reason,
            usage={
                "adapter": adapter_id,
                "prompt_chars": len(request.prompt),
                "completion_chars": len(text),
            },
        )
