"""Turn orchestration: route, plan, retrieve, generate (with the tool loop),
and emit the causal event stream.

Per-session turn processing is serialized by the caller; the engine itself
holds only read-mostly shared state (profiles, registry, index), each
swapped atomically on reload.
"""

from __future__ import annotations

import threading
from typing import Iterator

from ..backend.base import BackendError, GenerationBackend
from ..experts import (
    ExpertId,
    Profiles,
    RetrievalSpec,
    build_retrieval_prompt,
    plan,
    route,
)
from ..knowledge.index import Bm25Index
from ..toolcall import LoopLimits, ToolRegistry, default_registry, iter_tool_loop, splice_text
from .events import ChatEvent
from .sessions import ChatSession, SessionStore


class ChatEngine:
    def __init__(
        self,
        profiles: Profiles,
        backend: GenerationBackend,
        store: SessionStore,
        kb: Bm25Index | None = None,
        registry: ToolRegistry | None = None,
        limits: LoopLimits = LoopLimits(),
        retrieval: RetrievalSpec = RetrievalSpec(),
    ):
        self.profiles = profiles
        self.backend = backend
        self.store = store
        self.kb = kb
        self.registry = registry or default_registry()
        self.limits = limits
        self.retrieval = retrieval
        self._reload_lock = threading.Lock()

    def replace_profiles(self, profiles: Profiles) -> None:
        with self._reload_lock:
            self.profiles = profiles

    def replace_kb(self, kb: Bm25Index | None) -> None:
        with self._reload_lock:
            self.kb = kb

    def run_turn(
        self, session: ChatSession, message: str, explicit: ExpertId | None = None
    ) -> Iterator[ChatEvent]:
        """Yields route, then token/tool/retrieval events in causal order,
        terminated by exactly one done (or error)."""
        profiles = self.profiles  # snapshot: reloads never tear a turn
        seq = 0

        def event(event_type: str, payload: dict) -> ChatEvent:
            nonlocal seq
            out = ChatEvent(type=event_type, seq=seq, payload=payload)
            seq += 1
            self.store.append_event(session, out)
            return out

        self.store.append_message(session, "user", message)
        try:
            decision = route(message, explicit, profiles)
            yield event(
                "route",
                {
                    "expert": decision.expert.value,
                    "source": decision.source,
                    "matched": decision.matched,
                    "scores": {k.value: v for k, v in decision.scores.items()},
                },
            )
            execution = plan(decision, profiles, message, retrieval_spec=self.retrieval)
            profile = profiles[decision.expert]
            prompt = _compose(profile.preamble, session.history[:-1], message)

            if execution.retrieval is not None and self.kb is not None:
                results = self.kb.retrieve(
                    message, top_k=execution.retrieval.top_k, threshold=execution.retrieval.threshold
                )
                yield event(
                    "retrieval",
                    {
                        "results": [
                            {
                                "doc_id": r.chunk.doc_id,
                                "seq": r.chunk.seq,
                                "score": r.score,
                                "title": self._title(r.chunk.doc_id),
                                "text": r.chunk.text,
                                "injected": r.injected,
                                "guaranteed": r.guaranteed,
                            }
                            for r in results
                        ]
                    },
                )
                prompt = build_retrieval_prompt(
                    _preamble_with_history(profile.preamble, session.history[:-1]),
                    [r.chunk.text for r in results],
                    message,
                )

            registry = self.registry if execution.use_tools else ToolRegistry({})
            transcript_parts: list[str] = []
            finish_reason = "stop"
            usage: dict = {}
            budget_exceeded = False
            for step in iter_tool_loop(
                self.backend, prompt, registry, self.limits, adapter=execution.adapter
            ):
                if step.kind == "text":
                    transcript_parts.append(step.text)
                    yield event("token", {"text": step.text})
                elif step.kind == "tool_call":
                    yield event(
                        "tool_call",
                        {
                            "tool": step.command.tool,
                            "args": step.command.args,
                            "span": list(step.command.span),
                        },
                    )
                elif step.kind == "tool_result":
                    transcript_parts.append(splice_text(step.event))
                    yield event(
                        "tool_result",
                        {
                            "tool": step.event.command.tool,
                            "args": step.event.command.args,
                            "rendered": step.event.rendered,
                            "ok": step.event.ok,
                            "error_kind": step.event.error_kind,
                            "resumed_at": step.event.resumed_at,
                        },
                    )
                elif step.kind == "done":
                    finish_reason = step.finish_reason
                    usage = step.usage
                    budget_exceeded = step.budget_exceeded

            transcript = "".join(transcript_parts)
            self.store.append_message(session, "assistant", transcript)
            yield event(
                "done",
                {
                    "transcript": transcript,
                    "finish_reason": finish_reason,
                    "metadata": {
                        "adapter": execution.adapter.id,
                        "expert": decision.expert.value,
                        "budget_exceeded": budget_exceeded,
                        "usage": usage,
                    },
                },
            )
        except BackendError as exc:
            yield event("error", {"message": str(exc), "kind": type(exc).__name__})

    def _title(self, doc_id: str) -> str:
        if self.kb is None:
            return ""
        doc = self.kb.documents.get(doc_id)
        return doc.title if doc else ""


def _preamble_with_history(preamble: str, history: list[dict]) -> str:
    if not history:
        return preamble
    rendered = "\n".join(
        f"{'用户' if m['role'] == 'user' else '助手'}：{m['text']}" for m in history
    )
    return f"{preamble}\n\n此前对话：\n{rendered}"


def _compose(preamble: str, history: list[dict], message: str) -> str:
    base = _preamble_with_history(preamble, history)
    return f"{base}\n\n{message}"
