"""Chat sessions with append-only on-disk logs.

One JSONL file per session: a header line, then message and event lines in
arrival order. Restarting the service reloads every session with an
identical history.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .events import ChatEvent


@dataclass
class ChatSession:
    id: str
    expert: str | None = None  # sticky default expert, optional
    created_at: str = ""
    history: list[dict] = field(default_factory=list)  # {role, text}
    event_log: list[ChatEvent] = field(default_factory=list)

    def validate_history(self) -> bool:
        return all(
            m["role"] == ("user" if i % 2 == 0 else "assistant") for i, m in enumerate(self.history)
        )


class SessionStore:
    """In-memory registry backed by per-session append-only logs. With no
    directory configured, sessions are memory-only."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else None
        self._sessions: dict[str, ChatSession] = {}
        self._lock = threading.Lock()
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._load_all()

    def _path(self, session_id: str) -> Path | None:
        return self.directory / f"{session_id}.jsonl" if self.directory else None

    def _load_all(self) -> None:
        for path in sorted(self.directory.glob("*.jsonl")):
            session = self._load_one(path)
            if session:
                self._sessions[session.id] = session

    @staticmethod
    def _load_one(path: Path) -> ChatSession | None:
        session: ChatSession | None = None
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                kind = record.get("type")
                if kind == "session":
                    session = ChatSession(
                        id=record["id"], expert=record.get("expert"), created_at=record.get("created_at", "")
                    )
                elif session is None:
                    return None
                elif kind == "message":
                    session.history.append({"role": record["role"], "text": record["text"]})
                elif kind == "event":
                    session.event_log.append(ChatEvent.from_record(record["event"]))
        return session

    def _append(self, session_id: str, record: dict) -> None:
        path = self._path(session_id)
        if path is None:
            return
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    def create(self, expert: str | None = None, session_id: str | None = None) -> ChatSession:
        with self._lock:
            sid = session_id or uuid.uuid4().hex[:12]
            if sid in self._sessions:
                return self._sessions[sid]
            session = ChatSession(
                id=sid, expert=expert, created_at=datetime.now(timezone.utc).isoformat()
            )
            self._sessions[sid] = session
            self._append(sid, {"type": "session", "id": sid, "expert": expert, "created_at": session.created_at})
            return session

    def get(self, session_id: str) -> ChatSession | None:
        with self._lock:
            return self._sessions.get(session_id)

    def get_or_create(self, session_id: str | None, expert: str | None = None) -> ChatSession:
        if session_id:
            existing = self.get(session_id)
            if existing:
                return existing
        return self.create(expert=expert, session_id=session_id)

    def append_message(self, session: ChatSession, role: str, text: str) -> None:
        session.history.append({"role": role, "text": text})
        self._append(session.id, {"type": "message", "role": role, "text": text})

    def append_event(self, session: ChatSession, event: ChatEvent) -> None:
        session.event_log.append(event)
        self._append(session.id, {"type": "event", "event": event.to_record()})

    def all_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)
