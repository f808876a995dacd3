"""Chat event frames.

One serialized ChatEvent per server-sent-event frame; seq increases strictly
within a turn and exactly one ``done`` or ``error`` event terminates it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

EVENT_TYPES = ("route", "token", "tool_call", "tool_result", "retrieval", "done", "error")


@dataclass
class ChatEvent:
    type: str
    seq: int
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {self.type!r}")

    def to_record(self) -> dict:
        return {"type": self.type, "seq": self.seq, "payload": self.payload}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False)

    def to_frame(self) -> str:
        return f"data: {self.to_json()}\n\n"

    @classmethod
    def from_record(cls, record: dict) -> "ChatEvent":
        return cls(type=record["type"], seq=record["seq"], payload=dict(record.get("payload", {})))
