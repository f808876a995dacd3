"""Instruction records: the unit of every constructed dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..toolcall import parse_embedded


class Category(str, Enum):
    CONSULTING = "consulting"
    TASK = "task"
    COMPUTING = "computing"
    RETRIEVAL_ENHANCED = "retrieval_enhanced"


@dataclass(frozen=True)
class Message:
    role: str  # human | assistant
    text: str


@dataclass
class InstructionRecord:
    id: str
    category: Category
    messages: list[Message]
    context: str | None = None
    meta: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "messages": [{"role": m.role, "text": m.text} for m in self.messages],
            "context": self.context,
            "meta": dict(sorted(self.meta.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_record(cls, record: dict) -> "InstructionRecord":
        return cls(
            id=record["id"],
            category=Category(record["category"]),
            messages=[Message(role=m["role"], text=m["text"]) for m in record["messages"]],
            context=record.get("context"),
            meta=dict(record.get("meta", {})),
        )


def validate_record(record: InstructionRecord) -> list[str]:
    """Schema validation; returns a list of problems (empty = valid)."""
    problems: list[str] = []
    if not record.messages:
        problems.append("no messages")
        return problems
    for i, message in enumerate(record.messages):
        expected = "human" if i % 2 == 0 else "assistant"
        if message.role != expected:
            problems.append(f"message {i}: role {message.role!r}, expected {expected!r}")
        if not message.text or not message.text.strip():
            problems.append(f"message {i}: empty text")
    if len(record.messages) % 2 != 0:
        problems.append("dangling human message without assistant reply")
    if record.category is Category.COMPUTING:
        commands = []
        for message in record.messages:
            if message.role == "assistant":
                commands.extend(parse_embedded(message.text))
        if not commands:
            problems.append("computing record has no well-formed embedded tool command")
    return problems


def write_records(path: str | Path, records: list[InstructionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")


def read_records(path: str | Path) -> list[InstructionRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(InstructionRecord.from_record(json.loads(line)))
    return records


@dataclass
class RejectedCandidate:
    reason: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"reason": self.reason, **self.payload}, ensure_ascii=False, sort_keys=True)


def write_rejects(path: str | Path, rejects: list[RejectedCandidate]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for reject in rejects:
            handle.write(reject.to_json() + "\n")
