from finexpert.backend import AdapterRef, MockBackend, MockRule, MockScript
from finexpert.toolcall import LoopLimits, default_registry, parse_embedded, run_tool_loop


def make_backend(rules, default="", chunk_size=3):
    script = MockScript(rules=[MockRule(**r) for r in rules], default=default)
    return MockBackend(default_script=script, chunk_size=chunk_size)


def test_single_call_and_resume():
    backend = make_backend(
        [
            {"match": "→20]", "response": "，增长了20万元。"},
            {"match": "增长", "response": "答案是[Calculator(100*0.2)→"},
        ]
    )
    result = run_tool_loop(backend, "营收增长多少？", default_registry(), LoopLimits(max_calls=4, max_tokens=500))
    assert result.transcript == "答案是[Calculator(100*0.2)→20]，增长了20万元。"
    assert len(result.events) == 1
    assert result.events[0].rendered == "20"
    assert result.transcript[result.events[0].resumed_at - 1] == "]"
    assert result.finish_reason == "stop"
    assert not result.budget_exceeded


def test_no_bracket_passthrough():
    backend = make_backend([], default="纯文本回答，没有指令。")
    result = run_tool_loop(backend, "问题", default_registry())
    assert result.transcript == "纯文本回答，没有指令。"
    assert result.events == []


def test_budget_zero_flushes_command_as_plain():
    # one big chunk so the trailing text is already scanned when the loop ends
    backend = make_backend(
        [{"match": "问", "response": "先算[Calculator(2+2)→然后继续"}], chunk_size=100
    )
    result = run_tool_loop(backend, "问题", default_registry(), LoopLimits(max_calls=0, max_tokens=500))
    assert result.budget_exceeded
    assert result.finish_reason == "max_calls"
    assert result.events == []
    # nothing executed, nothing dropped
    assert result.transcript == "先算[Calculator(2+2)→然后继续"


def test_chained_calls():
    # first matching rule wins, so the most advanced transcript state comes first
    backend = make_backend(
        [
            {"match": "→0.5000]", "response": "完成。"},
            {"match": "→4]", "response": "再算[ProbabilityTable(0)→"},
            {"match": "问题", "response": "先算[Calculator(2*2)→"},
        ]
    )
    result = run_tool_loop(backend, "问题", default_registry(), LoopLimits(max_calls=4, max_tokens=500))
    assert result.transcript == "先算[Calculator(2*2)→4]再算[ProbabilityTable(0)→0.5000]完成。"
    assert [e.rendered for e in result.events] == ["4", "0.5000"]
    embedded = parse_embedded(result.transcript)
    assert [(c.tool, r) for c, r in embedded] == [("Calculator", "4"), ("ProbabilityTable", "0.5000")]


def test_max_calls_stops_chain():
    backend = make_backend(
        [
            # every resume matches again and emits another command
            {"match": "问题", "response": "[Calculator(1+1)→"},
        ]
    )
    result = run_tool_loop(backend, "问题", default_registry(), LoopLimits(max_calls=2, max_tokens=500))
    assert len(result.events) == 2
    assert result.budget_exceeded
    assert result.transcript.count("→2]") == 2


def test_tool_error_splices_error_and_continues():
    backend = make_backend(
        [
            {"match": "ERROR: MathError]", "response": "这个算式无效。"},
            {"match": "问题", "response": "[Calculator(1/0)→"},
        ]
    )
    result = run_tool_loop(backend, "问题", default_registry(), LoopLimits(max_calls=2, max_tokens=500))
    assert result.transcript == "[Calculator(1/0)→ERROR: MathError]这个算式无效。"
    assert result.events[0].error_kind == "MathError"


def test_stream_end_mid_command_flushed():
    backend = make_backend([{"match": "问题", "response": "结尾是残缺的[Calculator(2+"}])
    result = run_tool_loop(backend, "问题", default_registry())
    assert result.transcript == "结尾是残缺的[Calculator(2+"
    assert result.events == []


def test_max_tokens_bounds_emission():
    backend = make_backend([], default="很长的回答" * 100)
    result = run_tool_loop(backend, "q", default_registry(), LoopLimits(max_calls=2, max_tokens=10))
    assert len(result.transcript) == 10
    assert result.finish_reason == "length"


def test_stop_sequence_passthrough():
    backend = make_backend([], default="第一段\n\n第二段")
    result = run_tool_loop(backend, "q", default_registry(), stop_sequences=["\n\n"])
    assert result.transcript == "第一段"
    assert result.finish_reason == "stop"


def test_adapter_echoed_in_usage():
    backend = MockBackend(
        scripts={"lora-computing": MockScript(default="ok")},
        default_script=MockScript(default="default"),
    )
    result = run_tool_loop(backend, "q", default_registry(), adapter=AdapterRef(id="lora-computing"))
    assert result.transcript == "ok"
    assert result.usage["adapter"] == "lora-computing"


def test_each_command_executed_exactly_once():
    backend = make_backend(
        [
            {"match": "→3]", "response": "好了"},
            {"match": "问题", "response": "x[Calculator(1+2)→"},
        ],
        chunk_size=1,  # worst-case chunking
    )
    result = run_tool_loop(backend, "问题", default_registry(), LoopLimits(max_calls=5, max_tokens=500))
    assert len(result.events) == 1
    assert result.transcript == "x[Calculator(1+2)→3]好了"
