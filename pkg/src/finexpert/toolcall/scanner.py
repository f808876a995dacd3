"""Streaming detector for inline tool-call commands.

The scanner consumes generation chunks (which may split a command at any
byte boundary), passes ordinary text through untouched and exactly once,
and holds back any prefix that could still become ``[Tool(args)→``. A
completed head is reported as a pending ToolCommand; anything that turns
out not to be a command (unknown name, stray bracket, over-long candidate,
stream end) is flushed back into the plain-text stream verbatim.
"""

from __future__ import annotations

from collections import deque

from .command import ARROW, HOLDBACK_CAP, TOOL_NAMES, ToolCommand

_PLAIN = "plain"
_NAME = "name"
_ARGS = "args"
_AWAIT_ARROW = "await_arrow"
_AWAIT_GT = "await_gt"  # seen '-' of an ASCII '->'


class StreamScanner:
    """One scanner per generation session; not shared across sessions."""

    def __init__(self, tool_names: tuple[str, ...] = TOOL_NAMES):
        self.tool_names = tool_names
        self.mode = _PLAIN
        self.buffer: list[str] = []  # held-back candidate chars
        self._buffer_start = 0  # emission offset of buffer[0]
        self._depth = 0
        self._queue: deque[tuple[str, int]] = deque()  # (char, emission offset)
        self._pos = 0  # next fresh emission offset

    # -- public API ---------------------------------------------------------

    def scan_chunk(self, chunk: str) -> tuple[str, ToolCommand | None]:
        """Feed one chunk; returns (emitted plain text, pending command).

        When a command completes mid-chunk the remainder of the chunk stays
        queued; call scan_chunk("") (or resume()) to keep draining it.
        """
        for ch in chunk:
            self._queue.append((ch, self._pos))
            self._pos += 1
        return self._drain()

    def resume(self) -> tuple[str, ToolCommand | None]:
        """Continue scanning input that queued up behind a pending command."""
        return self._drain()

    def finish(self) -> str:
        """Stream ended: release queued text and any held candidate as plain.

        A command the caller never resumed for is released verbatim too —
        nothing is ever dropped.
        """
        parts = []
        while True:
            emitted, pending = self._drain()
            parts.append(emitted)
            if pending is None:
                break
            parts.append(pending.raw)
        if self.buffer:
            parts.append("".join(self.buffer))
            self.buffer.clear()
        self.mode = _PLAIN
        return "".join(parts)

    def discard_tail(self) -> str:
        """Drop queued input and held candidate (used when generation is
        interrupted and resumed server-side); returns what was dropped."""
        dropped = "".join(ch for ch, _ in self._queue) if self._queue else ""
        self._queue.clear()
        if self.buffer:
            dropped = "".join(self.buffer) + dropped
            self.buffer.clear()
        self.mode = _PLAIN
        return dropped

    @property
    def held(self) -> str:
        return "".join(self.buffer)

    @property
    def has_queued(self) -> bool:
        return bool(self._queue)

    # -- internals ----------------------------------------------------------

    def _drain(self) -> tuple[str, ToolCommand | None]:
        emitted: list[str] = []
        while self._queue:
            ch, pos = self._queue.popleft()
            result = self._step(ch, pos, emitted)
            if result is not None:
                return "".join(emitted), result
        return "".join(emitted), None

    def _step(self, ch: str, pos: int, emitted: list[str]) -> ToolCommand | None:
        if self.mode == _PLAIN:
            if ch == "[":
                self.mode = _NAME
                self.buffer = [ch]
                self._buffer_start = pos
            else:
                emitted.append(ch)
            return None

        if len(self.buffer) >= HOLDBACK_CAP:
            self._flush(ch, pos, emitted)
            return None

        if self.mode == _NAME:
            if ch == "(":
                name = "".join(self.buffer[1:])
                if name in self.tool_names:
                    self.buffer.append(ch)
                    self.mode = _ARGS
                    self._depth = 1
                else:
                    self._flush(ch, pos, emitted)
            elif ch.isalpha() and any(t.startswith("".join(self.buffer[1:]) + ch) for t in self.tool_names):
                self.buffer.append(ch)
            else:
                self._flush(ch, pos, emitted)
            return None

        if self.mode == _ARGS:
            if ch == "(":
                self._depth += 1
                self.buffer.append(ch)
            elif ch == ")":
                self._depth -= 1
                self.buffer.append(ch)
                if self._depth == 0:
                    self.mode = _AWAIT_ARROW
            elif ch == "]" or ch == ARROW:
                # ']' before the parens close, or an arrow inside the args:
                # not a command
                self._flush(ch, pos, emitted)
            else:
                self.buffer.append(ch)
            return None

        if self.mode == _AWAIT_ARROW:
            if ch == ARROW:
                return self._complete(ch, pos)
            if ch == "-":
                self.buffer.append(ch)
                self.mode = _AWAIT_GT
                return None
            self._flush(ch, pos, emitted)
            return None

        if self.mode == _AWAIT_GT:
            if ch == ">":
                return self._complete(ch, pos, ascii_arrow=True)
            self._flush(ch, pos, emitted)
            return None

        raise AssertionError(f"unknown mode {self.mode}")

    def _complete(self, ch: str, pos: int, ascii_arrow: bool = False) -> ToolCommand:
        raw = "".join(self.buffer) + ch
        open_paren = raw.index("(")
        tool = raw[1:open_paren]
        if ascii_arrow:
            args = raw[open_paren + 1 : -3]  # strip ")->"
            arrow_pos = pos - 1  # offset of the '-'
        else:
            args = raw[open_paren + 1 : -2]  # strip ")→"
            arrow_pos = pos
        self.buffer = []
        self.mode = _PLAIN
        return ToolCommand(tool=tool, args=args, span=(self._buffer_start, arrow_pos), raw=raw)

    def _flush(self, ch: str, pos: int, emitted: list[str]) -> None:
        """Candidate failed: emit the leading '[' as plain text, then requeue
        everything after it (plus the current char) for rescanning, so a later
        '[' inside the dead candidate still gets its chance."""
        requeue = [(c, self._buffer_start + i) for i, c in enumerate(self.buffer)][1:]
        requeue.append((ch, pos))
        for item in reversed(requeue):
            self._queue.appendleft(item)
        emitted.append(self.buffer[0])
        self.buffer = []
        self.mode = _PLAIN
