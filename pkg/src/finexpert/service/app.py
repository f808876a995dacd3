"""HTTP service.

Endpoints:
  POST /chat             — streamed chat (SSE frames, one ChatEvent each) or
                           a single JSON body with ?stream=false
  POST /tools/execute    — run one calculation tool directly
  GET  /retrieve         — query the knowledge base
  GET  /health           — backend reachability and index status
  GET  /experts          — the four expert profiles
  POST /experts/reload   — atomically replace profiles from their files
  GET  /                 — the console's static assets, when built
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse
from pydantic import BaseModel

from .. import fintools
from ..backend.mock import MockBackend, MockScript
from ..backend.remote import RemoteBackend
from ..experts import ExpertId, RetrievalSpec, default_profiles, load_profiles
from ..fintools.errors import ToolError
from ..knowledge.corpus import IndexNotLoaded
from ..knowledge.index import Bm25Index
from ..toolcall import LoopLimits
from .config import ServiceConfig
from .engine import ChatEngine
from .sessions import SessionStore

TOOL_EXECUTORS = {
    "Calculator": fintools.eval_expression,
    "EquationSolver": fintools.solve_equations_text,
    "Counter": fintools.count_samples,
    "ProbabilityTable": fintools.normal_cdf,
}


class ChatRequest(BaseModel):
    message: str
    session_id: str | None = None
    expert: str | None = None


class ToolRequest(BaseModel):
    tool: str
    input: str


class ReloadRequest(BaseModel):
    profiles_path: str | None = None


def build_backend(config: ServiceConfig):
    if config.backend.kind == "remote":
        remote = config.backend.remote
        return RemoteBackend(
            base_url=remote.base_url,
            model=remote.model,
            api_key_env=remote.api_key_env,
            timeout_s=remote.timeout_s,
            max_retries=remote.max_retries,
        )
    mock = config.backend.mock
    default_script = MockScript.from_file(mock.script_path) if mock.script_path else MockScript()
    scripts = {adapter: MockScript.from_file(path) for adapter, path in mock.scripts.items()}
    return MockBackend(scripts=scripts, default_script=default_script, chunk_size=mock.chunk_size)


def build_engine(config: ServiceConfig) -> ChatEngine:
    profiles = load_profiles(config.experts.profiles_path) if config.experts.profiles_path else default_profiles()
    kb = None
    if config.kb.index_dir and Path(config.kb.index_dir).exists():
        kb = Bm25Index.load(config.kb.index_dir)
    store = SessionStore(config.sessions_dir)
    return ChatEngine(
        profiles=profiles,
        backend=build_backend(config),
        store=store,
        kb=kb,
        limits=LoopLimits(max_calls=config.limits.max_calls, max_tokens=config.limits.max_tokens),
        retrieval=RetrievalSpec(top_k=config.kb.top_k, threshold=config.kb.threshold),
    )


def create_app(config: ServiceConfig | None = None, engine: ChatEngine | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    config = config or ServiceConfig()
    engine = engine or build_engine(config)
    app = FastAPI(title="finexpert", version="0.1.0")
    app.state.engine = engine
    app.state.config = config
    turn_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def _session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            if session_id not in turn_locks:
                turn_locks[session_id] = threading.Lock()
            return turn_locks[session_id]

    @app.post("/chat")
    def chat(request: ChatRequest, stream: bool = Query(default=True)):
        if not request.message or not request.message.strip():
            raise HTTPException(status_code=400, detail="message must be non-empty")
        explicit: ExpertId | None = None
        if request.expert:
            if request.expert == "auto":
                explicit = None
            else:
                try:
                    explicit = ExpertId(request.expert)
                except ValueError:
                    raise HTTPException(status_code=400, detail=f"unknown expert {request.expert!r}")
        session = engine.store.get_or_create(request.session_id, expert=request.expert)
        lock = _session_lock(session.id)

        if stream:
            def frames():
                with lock:  # per-session turns are serialized
                    for event in engine.run_turn(session, request.message, explicit):
                        yield event.to_frame()

            return StreamingResponse(
                frames(),
                media_type="text/event-stream",
                headers={"X-Session-Id": session.id, "Cache-Control": "no-store"},
            )

        with lock:
            events = list(engine.run_turn(session, request.message, explicit))
        last = events[-1]
        if last.type == "error":
            return JSONResponse(
                status_code=503,
                content={"session_id": session.id, "error": last.payload},
            )
        return {
            "session_id": session.id,
            "transcript": last.payload.get("transcript", ""),
            "events": [e.to_record() for e in events],
        }

    @app.post("/tools/execute")
    def tools_execute(request: ToolRequest):
        executor = TOOL_EXECUTORS.get(request.tool)
        if executor is None:
            raise HTTPException(status_code=400, detail=f"unknown tool {request.tool!r}")
        try:
            outcome = executor(request.input)
        except ToolError as exc:
            return JSONResponse(
                status_code=422,
                content={"error": exc.kind, "message": str(exc)},
            )
        value = outcome.value
        return {"tool": request.tool, "rendered": outcome.rendered, "value": value}

    @app.get("/retrieve")
    def retrieve(q: str, top_k: int = 3, threshold: float = 0.0):
        if engine.kb is None:
            raise HTTPException(status_code=409, detail="index not loaded")
        try:
            results = engine.kb.retrieve(q, top_k=top_k, threshold=threshold)
        except IndexNotLoaded as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "query": q,
            "results": [
                {
                    "doc_id": r.chunk.doc_id,
                    "seq": r.chunk.seq,
                    "score": r.score,
                    "text": r.chunk.text,
                    "title": (engine.kb.documents.get(r.chunk.doc_id).title
                              if r.chunk.doc_id in engine.kb.documents else ""),
                }
                for r in results
            ],
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "backend": engine.backend.health(),
            "index_loaded": engine.kb is not None,
            "sessions": len(engine.store.all_ids()),
        }

    @app.get("/experts")
    def experts():
        return {
            "experts": [
                {
                    "id": profile.id.value,
                    "adapter": profile.adapter.id,
                    "tools_enabled": profile.tools_enabled,
                    "retrieval_enabled": profile.retrieval_enabled,
                }
                for profile in engine.profiles.values()
            ]
        }

    @app.post("/experts/reload")
    def experts_reload(request: ReloadRequest):
        path = request.profiles_path or config.experts.profiles_path
        try:
            profiles = load_profiles(path) if path else default_profiles()
        except Exception as exc:
            # old profiles stay in service
            return JSONResponse(status_code=500, content={"error": str(exc)})
        engine.replace_profiles(profiles)
        return {"reloaded": True, "experts": [e.value for e in profiles]}

    if static_dir and Path(static_dir).exists():
        static_root = Path(static_dir)

        @app.get("/")
        def console_index():
            return FileResponse(static_root / "index.html")

        @app.get("/assets/{name:path}")
        def console_asset(name: str):
            assets_root = (static_root / "assets").resolve()
            target = (assets_root / name).resolve()
            if not str(target).startswith(str(assets_root)) or not target.is_file():
                raise HTTPException(status_code=404, detail="not found")
            return FileResponse(target)

    return app
