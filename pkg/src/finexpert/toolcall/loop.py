"""The generate/interrupt/execute/resume loop.

Generation runs until the scanner sees a complete command head. Decoding is
then interrupted: the command executes, its rendered result is spliced into
the transcript after the arrow, and generation resumes with the extended
prefix. Text the interrupted stream produced past the arrow was generated
without the tool result, so it is discarded; a well-behaved backend stops at
the arrow anyway.

The loop terminates on a natural stop, on the token budget, or on the call
budget. Hitting the call budget is recorded, not raised: the command that
overflowed is flushed into the transcript as plain text and the partial
transcript is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from ..backend.base import AdapterRef, Completion, GenerationBackend, GenerationRequest
from .command import SpliceEvent, ToolCommand
from .registry import ToolRegistry
from .scanner import StreamScanner
from .splice import execute_and_splice, splice_text


@dataclass(frozen=True)
class LoopLimits:
    max_calls: int = 8
    max_tokens: int = 2048


@dataclass
class LoopStep:
    kind: str  # text | tool_call | tool_result | done
    text: str = ""
    command: ToolCommand | None = None
    event: SpliceEvent | None = None
    finish_reason: str = ""
    usage: dict = field(default_factory=dict)
    budget_exceeded: bool = False


@dataclass
class LoopResult:
    transcript: str
    events: list[SpliceEvent]
    finish_reason: str
    usage: dict = field(default_factory=dict)
    budget_exceeded: bool = False


def iter_tool_loop(
    backend: GenerationBackend,
    prompt: str,
    registry: ToolRegistry,
    limits: LoopLimits = LoopLimits(),
    adapter: AdapterRef | None = None,
    stop_sequences: list[str] | None = None,
    temperature: float = 0.0,
) -> Iterator[LoopStep]:
    transcript: list[str] = []
    transcript_len = 0
    emitted_chars = 0  # model-emitted characters (splice results excluded)
    calls = 0
    budget_exceeded = False
    usage: dict = {}

    def push(text: str) -> None:
        nonlocal transcript_len
        transcript.append(text)
        transcript_len += len(text)

    while True:
        remaining = limits.max_tokens - emitted_chars
        if remaining <= 0:
            yield LoopStep(kind="done", finish_reason="length", usage=usage, budget_exceeded=budget_exceeded)
            return
        request = GenerationRequest(
            prompt=prompt + "".join(transcript),
            adapter=adapter,
            stop_sequences=list(stop_sequences or []),
            max_tokens=remaining,
            temperature=temperature,
        )
        scanner = StreamScanner(registry.names)
        stream = backend.generate_stream(request)
        completion: Completion | None = None
        interrupted = False

        for item in stream:
            if isinstance(item, Completion):
                completion = item
                usage = dict(item.usage)
                break
            emitted, pending = scanner.scan_chunk(item)
            if emitted:
                push(emitted)
                emitted_chars += len(emitted)
                yield LoopStep(kind="text", text=emitted)
            if pending is None:
                continue
            if calls >= limits.max_calls:
                # over budget: the command head becomes plain text and the
                # loop ends with whatever already streamed
                push(pending.raw)
                emitted_chars += len(pending.raw)
                yield LoopStep(kind="text", text=pending.raw)
                budget_exceeded = True
                tail = scanner.finish()
                if tail:
                    push(tail)
                    emitted_chars += len(tail)
                    yield LoopStep(kind="text", text=tail)
                stream.close()
                yield LoopStep(kind="done", finish_reason="max_calls", usage=usage, budget_exceeded=True)
                return
            yield LoopStep(kind="tool_call", command=pending)
            event = execute_and_splice(pending, registry)
            calls += 1
            emitted_chars += len(pending.raw)
            push(splice_text(event))
            event.resumed_at = transcript_len
            yield LoopStep(kind="tool_result", event=event)
            scanner.discard_tail()
            stream.close()
            interrupted = True
            break

        if interrupted:
            continue  # resume generation with the extended prefix

        tail = scanner.finish()
        if tail:
            push(tail)
            emitted_chars += len(tail)
            yield LoopStep(kind="text", text=tail)
        finish_reason = completion.finish_reason if completion else "stop"
        yield LoopStep(kind="done", finish_reason=finish_reason, usage=usage, budget_exceeded=budget_exceeded)
        return


def run_tool_loop(
    backend: GenerationBackend,
    prompt: str,
    registry: ToolRegistry,
    limits: LoopLimits = LoopLimits(),
    adapter: AdapterRef | None = None,
    stop_sequences: list[str] | None = None,
    temperature: float = 0.0,
) -> LoopResult:
    """Collecting wrapper around iter_tool_loop."""
    transcript: list[str] = []
    events: list[SpliceEvent] = []
    finish_reason = "stop"
    usage: dict = {}
    budget_exceeded = False
    for step in iter_tool_loop(backend, prompt, registry, limits, adapter, stop_sequences, temperature):
        if step.kind == "text":
            transcript.append(step.text)
        elif step.kind == "tool_result":
            transcript.append(splice_text(step.event))
            events.append(step.event)
        elif step.kind == "done":
            finish_reason = step.finish_reason
            usage = step.usage
            budget_exceeded = step.budget_exceeded
    return LoopResult(
        transcript="".join(transcript),
        events=events,
        finish_reason=finish_reason,
        usage=usage,
        budget_exceeded=budget_exceeded,
    )
