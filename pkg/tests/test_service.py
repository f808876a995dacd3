import json
import threading

import pytest
from fastapi.testclient import TestClient

from finexpert.backend import MockBackend, MockRule, MockScript
from finexpert.experts import DEFAULT_ADAPTER_IDS, ExpertId, default_profiles
from finexpert.knowledge import Bm25Index, Document
from finexpert.service import ChatEngine, ServiceConfig, SessionStore, config_from_dict
from finexpert.service.app import create_app
from finexpert.service.config import ConfigError
from finexpert.toolcall import LoopLimits


def expert_backend():
    """Each expert's script echoes its own marker; computing emits a command."""
    scripts = {
        "lora-consulting": MockScript(default="咨询回答。"),
        "lora-task": MockScript(default="任务输出。"),
        "lora-computing": MockScript(
            rules=[
                MockRule(match="→20]", response="即20万元。"),
                MockRule(match="增长", response="答案是[Calculator(100*0.2)→"),
            ],
            default="计算回答。",
        ),
        "lora-retrieval": MockScript(default="结合资料分析，前景乐观。"),
    }
    return MockBackend(scripts=scripts, default_script=MockScript(default="兜底回答。"), chunk_size=6)


def fixture_kb():
    docs = [
        Document(id="kb-1", kind="news", title="新能源观察", date="2023-06-01", source="t",
                 body="新能源板块今日放量上涨，机构关注度提升。"),
        Document(id="kb-2", kind="report_abstract", title="白酒研报", date="2023-06-02", source="t",
                 body="白酒行业景气度回升，维持增持评级。"),
        Document(id="kb-3", kind="other", title="杂记", date="2023-06-03", source="t",
                 body="qqz latin only filler text."),
    ]
    return Bm25Index.build(docs)


@pytest.fixture()
def client(tmp_path):
    engine = ChatEngine(
        profiles=default_profiles(),
        backend=expert_backend(),
        store=SessionStore(tmp_path / "sessions"),
        kb=fixture_kb(),
        limits=LoopLimits(max_calls=4, max_tokens=600),
    )
    app = create_app(ServiceConfig(), engine=engine)
    return TestClient(app)


def read_events(response) -> list[dict]:
    events = []
    for line in response.iter_lines():
        if line.startswith("data: "):
            events.append(json.loads(line[len("data: "):]))
    return events


class TestChat:
    def test_stream_computing_turn(self, client):
        with client.stream(
            "POST", "/chat", json={"message": "营收增长多少？", "expert": "computing"}
        ) as response:
            assert response.status_code == 200
            events = read_events(response)
        types = [e["type"] for e in events]
        assert types[0] == "route"
        assert types.count("tool_call") == 1
        assert types.count("tool_result") == 1
        assert types[-1] == "done"
        assert types.index("tool_call") < types.index("tool_result")
        result_event = next(e for e in events if e["type"] == "tool_result")
        assert result_event["payload"]["rendered"] == "20"
        done = events[-1]["payload"]
        assert done["metadata"]["adapter"] == "lora-computing"
        # transcript equals token payloads plus splices
        rebuilt = "".join(
            e["payload"]["text"] if e["type"] == "token"
            else f"[{e['payload']['tool']}({e['payload']['args']})→{e['payload']['rendered']}]"
            for e in events
            if e["type"] in ("token", "tool_result")
        )
        assert rebuilt == done["transcript"]
        assert "[Calculator(100*0.2)→20]" in done["transcript"]

    def test_stream_retrieval_turn(self, client):
        with client.stream(
            "POST", "/chat", json={"message": "新能源板块有什么动态？", "expert": "retrieval"}
        ) as response:
            events = read_events(response)
        retrieval = next(e for e in events if e["type"] == "retrieval")
        assert 1 <= len(retrieval["payload"]["results"]) <= 3
        assert retrieval["payload"]["results"][0]["doc_id"] == "kb-1"
        assert events[-1]["payload"]["metadata"]["adapter"] == "lora-retrieval"

    def test_seq_strictly_increasing(self, client):
        with client.stream("POST", "/chat", json={"message": "你好", "expert": "consulting"}) as response:
            events = read_events(response)
        seqs = [e["seq"] for e in events]
        assert seqs == sorted(seqs)
        assert len(set(seqs)) == len(seqs)
        assert sum(1 for e in events if e["type"] in ("done", "error")) == 1

    def test_non_streaming_mode(self, client):
        response = client.post("/chat?stream=false", json={"message": "你好", "expert": "consulting"})
        assert response.status_code == 200
        body = response.json()
        assert body["transcript"] == "咨询回答。"
        assert body["events"][0]["type"] == "route"
        assert body["session_id"]

    def test_empty_message_400(self, client):
        assert client.post("/chat", json={"message": "  "}).status_code == 400

    def test_bad_expert_400(self, client):
        assert client.post("/chat", json={"message": "hi", "expert": "wizard"}).status_code == 400

    def test_session_continues(self, client):
        first = client.post("/chat?stream=false", json={"message": "第一句", "expert": "consulting"}).json()
        second = client.post(
            "/chat?stream=false",
            json={"message": "第二句", "expert": "consulting", "session_id": first["session_id"]},
        ).json()
        assert second["session_id"] == first["session_id"]

    def test_auto_expert_routes(self, client):
        body = client.post("/chat?stream=false", json={"message": "请计算2+2等于多少"}).json()
        route_event = body["events"][0]
        assert route_event["payload"]["expert"] == "computing"
        assert route_event["payload"]["source"] == "rule"


class TestToolsEndpoint:
    def test_calculator(self, client):
        response = client.post("/tools/execute", json={"tool": "Calculator", "input": "2+3"})
        assert response.status_code == 200
        assert response.json() == {"tool": "Calculator", "rendered": "5", "value": 5.0}

    def test_probability_table(self, client):
        body = client.post("/tools/execute", json={"tool": "ProbabilityTable", "input": "0"}).json()
        assert body["rendered"] == "0.5000"

    def test_equation_solver_inconsistent_422(self, client):
        response = client.post(
            "/tools/execute", json={"tool": "EquationSolver", "input": "x+y=1; x+y=2"}
        )
        assert response.status_code == 422
        assert response.json()["error"] == "Inconsistent"

    def test_unknown_tool_400(self, client):
        assert client.post("/tools/execute", json={"tool": "Oracle", "input": "x"}).status_code == 400


class TestRetrieveEndpoint:
    def test_planted_term_first(self, client):
        body = client.get("/retrieve", params={"q": "白酒 景气度", "top_k": 3}).json()
        assert body["results"][0]["doc_id"] == "kb-2"
        assert body["results"][0]["title"] == "白酒研报"

    def test_zero_overlap_empty_200(self, client):
        response = client.get("/retrieve", params={"q": "毫无交集词汇", "top_k": 3})
        assert response.status_code == 200
        assert response.json()["results"] == []

    def test_no_index_409(self, tmp_path):
        engine = ChatEngine(
            profiles=default_profiles(),
            backend=expert_backend(),
            store=SessionStore(None),
            kb=None,
        )
        client = TestClient(create_app(ServiceConfig(), engine=engine))
        assert client.get("/retrieve", params={"q": "x"}).status_code == 409


class TestAdmin:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["backend"] is True
        assert body["index_loaded"] is True

    def test_experts_lists_four(self, client):
        body = client.get("/experts").json()
        assert len(body["experts"]) == 4
        ids = {e["id"] for e in body["experts"]}
        assert ids == {"consulting", "task", "computing", "retrieval"}

    def test_reload_with_valid_file(self, client, tmp_path):
        path = tmp_path / "profiles.json"
        path.write_text('{"computing": {"adapter": "swapped"}}', encoding="utf-8")
        response = client.post("/experts/reload", json={"profiles_path": str(path)})
        assert response.status_code == 200
        experts = client.get("/experts").json()["experts"]
        computing = next(e for e in experts if e["id"] == "computing")
        assert computing["adapter"] == "swapped"

    def test_reload_bad_file_keeps_old(self, client, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        before = client.get("/experts").json()
        assert client.post("/experts/reload", json={"profiles_path": str(path)}).status_code == 500
        assert client.get("/experts").json() == before


class TestPersistence:
    def test_sessions_reload_identical(self, tmp_path):
        store = SessionStore(tmp_path / "sessions")
        engine = ChatEngine(
            profiles=default_profiles(), backend=expert_backend(), store=store, kb=None
        )
        client = TestClient(create_app(ServiceConfig(), engine=engine))
        first = client.post("/chat?stream=false", json={"message": "第一句", "expert": "consulting"}).json()
        client.post(
            "/chat?stream=false",
            json={"message": "第二句", "expert": "consulting", "session_id": first["session_id"]},
        )
        original = store.get(first["session_id"])

        reloaded_store = SessionStore(tmp_path / "sessions")
        reloaded = reloaded_store.get(first["session_id"])
        assert reloaded is not None
        assert reloaded.history == original.history
        assert [e.to_record() for e in reloaded.event_log] == [
            e.to_record() for e in original.event_log
        ]
        assert reloaded.validate_history()


class TestConcurrentSessions:
    def test_adapter_isolation_and_ordering(self, client):
        experts = ["consulting", "task", "computing", "retrieval"]
        outcomes: dict[int, dict] = {}
        errors: list[Exception] = []

        def run(i: int):
            expert = experts[i % 4]
            message = "营收增长多少？" if expert == "computing" else f"第{i}个问题"
            try:
                body = client.post(
                    "/chat?stream=false", json={"message": message, "expert": expert}
                ).json()
                outcomes[i] = body
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=run, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(outcomes) == 16
        for i, body in outcomes.items():
            expert = experts[i % 4]
            done = body["events"][-1]
            assert done["type"] == "done"
            assert done["payload"]["metadata"]["adapter"] == DEFAULT_ADAPTER_IDS[ExpertId(expert)]
            seqs = [e["seq"] for e in body["events"]]
            assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


class TestStaticConsole:
    def test_index_and_assets_served(self, tmp_path):
        static = tmp_path / "dist"
        (static / "assets").mkdir(parents=True)
        (static / "index.html").write_text("<!doctype html><title>console</title>", encoding="utf-8")
        (static / "assets" / "main.js").write_text("export {};", encoding="utf-8")

        engine = ChatEngine(
            profiles=default_profiles(), backend=expert_backend(), store=SessionStore(None), kb=None
        )
        client = TestClient(create_app(ServiceConfig(), engine=engine, static_dir=static))
        assert client.get("/").status_code == 200
        assert "console" in client.get("/").text
        assert client.get("/assets/main.js").status_code == 200
        assert client.get("/assets/missing.js").status_code == 404
        assert client.get("/assets/../index.html").status_code == 404


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"bakcend": {}})
        with pytest.raises(ConfigError):
            config_from_dict({"backend": {"kind": "mock", "chunk": 1}})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"backend": {"kind": "quantum"}})
        with pytest.raises(ConfigError):
            config_from_dict({"kb": {"noise_prob": 2.0}})

    def test_valid_config(self):
        config = config_from_dict(
            {
                "listen": {"host": "0.0.0.0", "port": 9000},
                "backend": {"kind": "mock", "mock": {"chunk_size": 4}},
                "kb": {"top_k": 5},
                "limits": {"max_calls": 2, "max_tokens": 100},
            }
        )
        assert config.listen.port == 9000
        assert config.backend.mock.chunk_size == 4
        assert config.kb.top_k == 5
