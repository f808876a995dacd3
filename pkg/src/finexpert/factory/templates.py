"""Prompt template registry.

Templates are authored data (data/templates.json), addressed by stable id;
the id used for every generated record lands in its meta, so datasets stay
auditable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

_SLOT = re.compile(r"\{([a-z_]+)\}")


class SlotMismatch(Exception):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    category: str
    shot_mode: str  # zero | few
    body: str
    required_slots: tuple[str, ...]
    verbalizer: dict = field(default_factory=dict)
    demo_format: str = ""

    def render(self, **slots: str) -> str:
        missing = [name for name in self.required_slots if name not in slots]
        if missing:
            raise SlotMismatch(f"template {self.id}: missing slots {missing}")
        try:
            text = self.body.format(**slots)
        except KeyError as exc:
            raise SlotMismatch(f"template {self.id}: sample lacks field {exc}") from exc
        leftover = _SLOT.search(text)
        if leftover:
            raise SlotMismatch(f"template {self.id}: unfilled slot {leftover.group(0)}")
        return text

    def render_demo(self, **slots: str) -> str:
        if not self.demo_format:
            raise SlotMismatch(f"template {self.id} has no demonstration format")
        try:
            return self.demo_format.format(**slots)
        except KeyError as exc:
            raise SlotMismatch(f"template {self.id}: demo lacks field {exc}") from exc

    def verbalize(self, label: str) -> str:
        return self.verbalizer.get(label, label)


class TemplateRegistry:
    def __init__(self, templates: dict[str, PromptTemplate]):
        self._templates = dict(templates)

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates

    def get(self, template_id: str) -> PromptTemplate:
        if template_id not in self._templates:
            raise KeyError(f"unknown template {template_id!r}")
        return self._templates[template_id]

    def by_category(self, category: str) -> list[PromptTemplate]:
        return sorted(
            (t for t in self._templates.values() if t.category == category), key=lambda t: t.id
        )

    def ids(self) -> list[str]:
        return sorted(self._templates)

    @classmethod
    def from_dict(cls, data: dict) -> "TemplateRegistry":
        templates = {}
        for template_id, spec in data.items():
            templates[template_id] = PromptTemplate(
                id=template_id,
                category=spec["category"],
                shot_mode=spec.get("shot_mode", "zero"),
                body=spec["body"],
                required_slots=tuple(spec.get("required_slots", [])),
                verbalizer=dict(spec.get("verbalizer", {})),
                demo_format=spec.get("demo_format", ""),
            )
        return cls(templates)

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateRegistry":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_templates() -> TemplateRegistry:
    text = resources.files("finexpert.data").joinpath("templates.json").read_text(encoding="utf-8")
    return TemplateRegistry.from_dict(json.loads(text))
