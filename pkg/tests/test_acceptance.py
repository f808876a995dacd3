"""Acceptance suite.

One test per acceptance criterion, each printing a PASS line (visible with
pytest -s) after its assertions hold at the stated tolerances. Benchmark
numbers from large fine-tuned models are out of reach at desk scale, so
acceptance is property-based plus pipeline-level reproduction with mocks.
"""

import json
import random
import threading
import time

import pytest
from fastapi.testclient import TestClient

from finexpert.backend import MockBackend, MockRule, MockScript
from finexpert.evalkit import (
    ComputingItem,
    EvalTask,
    aggregate_computing,
    judge_batch,
    run_benchmark,
    score_accuracy,
    score_computing,
    score_f1,
    score_rouge_l,
    overlap_tokens,
)
from finexpert.experts import DEFAULT_ADAPTER_IDS, ExpertId, default_profiles
from finexpert.factory import (
    MockTeacher,
    TeacherRule,
    default_seeds,
    gen_computing,
    gen_consulting_qa,
    gen_reading_comprehension,
    gen_retrieval_enhanced,
    gen_task_instructions,
    default_templates,
    validate_commands,
    validate_record,
)
from finexpert.fintools import MathError, eval_expression, phi, solve_linear_system
from finexpert.knowledge import Bm25Index, Document
from finexpert.service import ChatEngine, ServiceConfig, SessionStore
from finexpert.service.app import create_app
from finexpert.toolcall import LoopLimits, StreamScanner, default_registry, execute_and_splice

from metric_cases import FROZEN_CASES, oracle_overlap_scores
from oracles import OracleMathError, gen_error_expr, gen_expr, mp_eval, phi_quad, render_expr


def report(line: str) -> None:
    print(f"\nACCEPTANCE {line}")


# ---------------------------------------------------------------------------
# 1. tool correctness
# ---------------------------------------------------------------------------


class TestToolCorrectness:
    def test_tool_correctness(self):
        started = time.monotonic()
        rng = random.Random(881_2024)

        checked = errors = 0
        for i in range(1000):
            if i % 10 == 9:
                node = gen_error_expr(rng)
                with pytest.raises(OracleMathError):
                    mp_eval(node)
                with pytest.raises(MathError):
                    eval_expression(render_expr(node))
                errors += 1
            else:
                node, expected = gen_expr(rng, depth=6)
                got = eval_expression(render_expr(node)).value
                expected_f = float(expected)
                if expected_f == 0:
                    assert abs(got) <= 1e-15, render_expr(node)
                else:
                    assert abs(got - expected_f) <= 1e-9 * abs(expected_f), render_expr(node)
                checked += 1
        assert checked + errors == 1000

        grid_points = 0
        x = -4.0
        while x <= 4.0 + 1e-12:
            assert abs(phi(x) - phi_quad(x)) <= 1e-7, x
            grid_points += 1
            x = round(x + 0.01, 10)
        assert grid_points == 801

        for _ in range(100):
            n = rng.randint(1, 8)
            variables = [chr(ord("a") + j) for j in range(n)]
            target = [rng.randint(-9, 9) for _ in range(n)]
            equations = []
            for i in range(n):
                coeffs = [rng.randint(-5, 5) for _ in range(n)]
                coeffs[i] = rng.randint(6 * n, 9 * n)
                rhs = sum(c * t for c, t in zip(coeffs, target))
                terms = "".join(
                    f"{'+' if c > 0 else '-'}{abs(c)}*{v}" for c, v in zip(coeffs, variables) if c
                ).lstrip("+")
                equations.append(f"{terms or '0'}={rhs}")
            outcome = solve_linear_system(equations)
            for eq, row_target in zip(equations, range(n)):
                lhs_text, rhs_text = eq.split("=")
                rhs = float(rhs_text)
                total = 0.0
                token = ""
                parts = []
                for ch in lhs_text:
                    if ch in "+-" and token:
                        parts.append(token)
                        token = ch
                    else:
                        token += ch
                parts.append(token)
                for part in parts:
                    coeff, _, var = part.partition("*")
                    total += float(coeff) * outcome.value[var]
                assert abs(total - rhs) <= 1e-9 * (1 + abs(rhs)), eq

        elapsed = time.monotonic() - started
        assert elapsed < 30.0, f"tool correctness took {elapsed:.1f}s"
        report(
            f"tool-correctness PASS (1000 expressions [{errors} matched errors], "
            f"801 phi grid points, 100 linear systems, {elapsed:.1f}s)"
        )


# ---------------------------------------------------------------------------
# 2. protocol no-loss
# ---------------------------------------------------------------------------

_COMMANDS = [
    "[Calculator(2+3)→",
    "[Calculator((1+2)*4)→",
    "[Calculator(1/0)→",
    "[EquationSolver(x+y=3; x-y=1)→",
    "[Counter(1,2,3)→",
    "[ProbabilityTable(0.5)→",
    "[Counter(5.5, -2)->",
]

_NOISE = [
    "营收", "增长20%", "[", "]", "→", "->", "[Calc", "[Fake(1)→x]", "(平)", "x\n",
    "5]", "ERROR: MathError]", " ", "。", "[Calculator(殘", "[[",
]


def _build_emission(rng: random.Random) -> tuple[str, int]:
    parts = []
    complete = 0
    for _ in range(rng.randint(0, 10)):
        if rng.random() < 0.35:
            parts.append(rng.choice(_COMMANDS))
            complete += 1
            if rng.random() < 0.75:
                parts.append(rng.choice(["5]", "0.9750]", "ERROR: MathError]"]))
        else:
            parts.append(rng.choice(_NOISE))
    return "".join(parts), complete


class TestProtocolNoLoss:
    def test_no_loss_over_random_chunkings(self):
        started = time.monotonic()
        rng = random.Random(424_242)
        registry = default_registry()
        pairs = 10_000
        total_commands = 0

        for _ in range(pairs):
            emission, _ = _build_emission(rng)
            chunks = []
            i = 0
            while i < len(emission):
                size = rng.randint(1, 8)
                chunks.append(emission[i : i + size])
                i += size

            scanner = StreamScanner()
            pieces = []
            events = []
            commands = []
            for chunk in chunks:
                out, pending = scanner.scan_chunk(chunk)
                pieces.append(out)
                while pending is not None:
                    commands.append(pending)
                    events.append(execute_and_splice(pending, registry))
                    pieces.append(pending.raw)
                    out, pending = scanner.resume()
                    pieces.append(out)
            pieces.append(scanner.finish())

            # reconstruction identity
            assert "".join(pieces) == emission
            # executed exactly once: one splice event per detected command,
            # and chunking never changes what is detected
            assert len(events) == len(commands)
            baseline = StreamScanner()
            base_commands = []
            out, pending = baseline.scan_chunk(emission)
            while pending is not None:
                base_commands.append(pending)
                out, pending = baseline.resume()
            assert [c.raw for c in commands] == [c.raw for c in base_commands]
            total_commands += len(commands)

        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"no-loss property took {elapsed:.1f}s"
        report(
            f"protocol-no-loss PASS ({pairs} (text, chunking) pairs, "
            f"{total_commands} commands executed exactly once, {elapsed:.1f}s)"
        )


# ---------------------------------------------------------------------------
# 3. end-to-end computing
# ---------------------------------------------------------------------------

COMPUTING_ITEMS = [
    ("去年营收100万元，今年120万元，同比增长率是多少？", "(120-100)/100", 0.2),
    ("销售额从5000万元增至5600万元，增长率是多少？", "(5600-5000)/5000", 0.12),
    ("100元基数上涨20%后是多少元？", "100*(1+20%)", 120.0),
    ("本金10000元年利率5%复利3年后本息合计？", "10000*(1+0.05)^3", 11576.25),
    ("2的10次方等于多少？", "2^10", 1024.0),
    ("四个季度增速80、90、85、95的均值是多少？", "(80+90+85+95)/4", 87.5),
    ("两年后支付120000元，贴现率4%，现值多少？", "120000/(1+0.04)^2", 110946.745562),
    ("面积为16平方单位的正方形边长的2倍是多少？", "sqrt(16)*2", 8.0),
    ("某资产从250万元跌去20%，还剩多少万元？", "250*(1-20%)", 200.0),
    ("增长率12%连续两年，累计增长多少？", "(1+0.12)^2-1", 0.2544),
    ("营收1200万元成本900万元，毛利率是多少？", "(1200-900)/1200", 0.25),
    ("每手100股，买入37手共多少股？", "100*37", 3700.0),
    ("日收益0.1%按复利250个交易日累计收益率？", "(1+0.001)^250-1", 0.2838650304502215),
    ("1000万元按6%年化收益，半年利息多少万元？", "1000*0.06/2", 30.0),
    ("市盈率=股价42元/每股收益3.5元，等于多少？", "42/3.5", 12.0),
    ("净利润率8%，营收2500万元，净利润多少万元？", "2500*8%", 200.0),
    ("组合里股票60%债券30%现金10%，股票比债券多几个百分点？", "(0.6-0.3)*100", 30.0),
    ("三年累计通胀 (1.02*1.03*1.025-1) 是多少？", "1.02*1.03*1.025-1", 0.076865),
    ("贷款余额500万元，偿还了125万元，剩余比例是多少？", "(500-125)/500", 0.75),
    ("总市值从8000亿元涨到8800亿元，涨幅是多少？", "(8800-8000)/8000", 0.1),
]


def _computing_backend(items: list[ComputingItem]) -> MockBackend:
    rules = []
    # continuation rules first: once the splice is in the prompt, stop calling
    for item in items:
        rendered = eval_expression(item.gold_formula).rendered
        rules.append(MockRule(match=f"[Calculator({item.gold_formula})→{rendered}]", response="计算完毕。"))
    for item in items:
        rules.append(MockRule(match=item.question, response=f"[Calculator({item.gold_formula})→"))
    return MockBackend(default_script=MockScript(rules=rules, default="无法回答。"), chunk_size=7)


class TestEndToEndComputing:
    def _items(self):
        return [
            ComputingItem(question=q, gold_formula=f, gold_result=r, tolerance=1e-6)
            for q, f, r in COMPUTING_ITEMS
        ]

    def test_formula_and_result_both_perfect(self):
        items = self._items()
        assert len(items) == 20
        backend = _computing_backend(items)
        task = EvalTask(
            id="acceptance-computing",
            kind="computing",
            items=[
                {"question": i.question, "gold_formula": i.gold_formula, "gold_result": i.gold_result}
                for i in items
            ],
        )
        task_report = run_benchmark(
            task, default_profiles(), backend, limits=LoopLimits(max_calls=2, max_tokens=800)
        )
        assert task_report.aggregate == {"formula": 1.0, "formula_and_result": 1.0}

        # tampered-result variants: formula survives, result does not
        tampered_rows = []
        for item in items:
            transcript = f"算式为[Calculator({item.gold_formula})→999999999]。"
            tampered_rows.append(score_computing(transcript, None, item))
        tampered = aggregate_computing(tampered_rows)
        assert tampered == {"formula": 1.0, "formula_and_result": 0.0}
        report("end-to-end-computing PASS (20 items: 1.0/1.0 clean, 1.0/0.0 tampered)")


# ---------------------------------------------------------------------------
# 4. retrieval
# ---------------------------------------------------------------------------

_FILLER = [
    "市场情绪整体平稳，成交量较昨日小幅回落。",
    "机构观点认为流动性保持合理充裕。",
    "宏观数据符合预期，板块轮动延续。",
    "监管部门强调防范金融风险。",
    "外资持续流入，北向资金净买入。",
]


def _synthetic_kb() -> Bm25Index:
    rng = random.Random(606)
    docs = []
    for i in range(100):
        filler = _FILLER[i % len(_FILLER)]
        docs.append(
            Document(
                id=f"planted-{i:03d}",
                kind="news",
                title=f"专题{i}",
                date="2023-07-01",
                source="synthetic",
                body=f"{filler}核心标的 planted{i:03d} 获得关注，{filler}",
            )
        )
    for i in range(100):
        docs.append(
            Document(
                id=f"filler-{i:03d}",
                kind="news" if i % 2 else "report_abstract",
                title=f"综述{i}",
                date="2023-07-02",
                source="synthetic",
                body=_FILLER[i % len(_FILLER)] + _FILLER[(i + 1) % len(_FILLER)],
            )
        )
    rng.shuffle(docs)
    return Bm25Index.build(docs)


class TestRetrievalAcceptance:
    def test_planted_chunks_and_roundtrip(self, tmp_path):
        kb = _synthetic_kb()
        assert len(kb.documents) == 200

        hits = 0
        for i in range(100):
            results = kb.retrieve(f"请分析 planted{i:03d} 的最新动态", top_k=3)
            if any(r.chunk.doc_id == f"planted-{i:03d}" for r in results):
                hits += 1
        assert hits >= 95, f"planted recall {hits}/100"

        for i in range(100):
            for threshold in (1e-9, 0.5, 10.0):
                assert kb.retrieve(f"zzqx{i} 不存在词汇xyzv", top_k=3, threshold=threshold) == []

        kb.save(tmp_path / "idx")
        reloaded = Bm25Index.load(tmp_path / "idx")
        for i in range(100):
            query = f"请分析 planted{i:03d} 的最新动态"
            original = json.dumps(
                [(r.chunk.doc_id, r.chunk.seq, r.score) for r in kb.retrieve(query, top_k=3)]
            )
            restored = json.dumps(
                [(r.chunk.doc_id, r.chunk.seq, r.score) for r in reloaded.retrieve(query, top_k=3)]
            )
            assert original.encode() == restored.encode()
        report(f"retrieval PASS (planted top-3 recall {hits}/100, zero-overlap 100%, roundtrip byte-identical)")


# ---------------------------------------------------------------------------
# 5. factory
# ---------------------------------------------------------------------------

_TERMS = ["市盈率", "可转债", "杠杆收购", "久期", "流动性覆盖率", "资本充足率", "夏普比率", "贝塔系数", "存款准备金率", "逆回购"]


def _teacher() -> MockTeacher:
    return MockTeacher(
        rules=[
            TeacherRule(pattern="标题：(?P<t>[^\n]+)", response="{g:t}相关主题当前如何研判？"),
            TeacherRule(match="参考资料", response="结合资料看，景气度有望延续，建议关注。"),
            TeacherRule(
                match="请模仿以上示例",
                response="问题：第{count}期基数100元上调5%后是多少？\n解答：调整后为[Calculator(100*1.05)→105]元。",
            ),
            TeacherRule(match="提出一个可以仅凭段落内容回答的问题", response="这段材料的核心结论是什么？"),
            TeacherRule(match="根据段落内容回答问题", response="核心结论是基本面稳健。"),
        ],
        default="这是一条专业、详实的金融解答。",
    )


class TestFactoryAcceptance:
    def test_hundred_records_per_category(self):
        started = time.monotonic()
        templates = default_templates()

        consulting = gen_consulting_qa(
            _TERMS, _teacher(), n=100, templates=templates, rng=random.Random(11), generated_at="t"
        )
        assert len(consulting) == 100
        assert all(validate_record(r) == [] for r in consulting)

        sentiment = [
            {"text": f"样本{i}：市场表现{'强劲' if i % 3 == 0 else '疲弱' if i % 3 == 1 else '平稳'}",
             "label": ["positive", "negative", "neutral"][i % 3]}
            for i in range(50)
        ]
        task_records = gen_task_instructions(
            sentiment, templates.get("task-sentiment-zero-v1"), generated_at="t"
        )
        task_records += gen_reading_comprehension(
            [f"第{i}段：行业利润率持续改善，现金流充沛。" for i in range(50)],
            _teacher(),
            templates=templates,
            generated_at="t",
        )
        assert len(task_records) == 100
        assert all(validate_record(r) == [] for r in task_records)

        computing = gen_computing(
            default_seeds(), _teacher(), target_n=100, templates=templates,
            rng=random.Random(13), generated_at="t",
        )
        assert len(computing) == 100
        assert all(validate_record(r) == [] for r in computing)
        # 100% of accepted records pass re-execution
        for record in computing:
            assert validate_commands(record.messages[1].text) == []

        kb = _synthetic_kb()
        retrieval = gen_retrieval_enhanced(
            kb, _teacher(), target_n=400, templates=templates, rng=random.Random(17),
            noise_prob=0.25, generated_at="t",
        )
        assert len(retrieval) == 400
        assert all(validate_record(r) == [] for r in retrieval)
        shares = {
            name: sum(1 for r in retrieval if r.meta["analysis_category"] == name) / 400
            for name in ("industry", "policy", "investment", "other")
        }
        for name, expected in (("industry", 0.53), ("policy", 0.13), ("investment", 0.08), ("other", 0.26)):
            assert abs(shares[name] - expected) <= 0.05, shares

        # fixed seed => byte-identical output
        rerun = gen_retrieval_enhanced(
            kb, _teacher(), target_n=400, templates=templates, rng=random.Random(17),
            noise_prob=0.25, generated_at="t",
        )
        assert [r.to_json() for r in rerun] == [r.to_json() for r in retrieval]
        rerun_consulting = gen_consulting_qa(
            _TERMS, _teacher(), n=100, templates=templates, rng=random.Random(11), generated_at="t"
        )
        assert [r.to_json() for r in rerun_consulting] == [r.to_json() for r in consulting]

        elapsed = time.monotonic() - started
        assert elapsed < 120.0, f"factory acceptance took {elapsed:.1f}s"
        report(
            f"factory PASS (100/100/100 + 400 records schema-valid, shares {shares}, "
            f"byte-identical reruns, {elapsed:.1f}s)"
        )


# ---------------------------------------------------------------------------
# 6. evalkit oracles
# ---------------------------------------------------------------------------


class TestEvalkitAcceptance:
    def test_frozen_suite_and_judge_table(self):
        for case_id, metric, pred, gold, expected in FROZEN_CASES:
            if metric == "accuracy":
                assert score_accuracy(pred, gold) == expected, case_id
            elif metric == "f1":
                scores = score_f1(pred, gold)
                assert (scores["precision"], scores["recall"], scores["f1"]) == expected, case_id
                assert expected == oracle_overlap_scores(
                    overlap_tokens(pred), overlap_tokens(gold), lcs=False
                ), case_id
            else:
                scores = score_rouge_l(pred, gold)
                assert (scores["precision"], scores["recall"], scores["f"]) == expected, case_id
                assert expected == oracle_overlap_scores(
                    overlap_tokens(pred), overlap_tokens(gold), lcs=True
                ), case_id

        judge = MockTeacher(default="accuracy:4 usefulness:4 linguistic:5 reflectiveness:3")
        judge_report = judge_batch(
            [{"question": f"问题{i}", "references": "[1] 参考", "answer": "回答"} for i in range(10)],
            judge,
        )
        table = judge_report.format_table()
        lines = table.splitlines()
        assert len(lines) == 2
        header_cols = lines[0].split()
        assert header_cols == ["Accuracy", "Usefulness", "Linguistic", "Reflectiveness"]
        assert lines[1].split() == ["4.00", "4.00", "5.00", "3.00"]
        assert all(1.0 <= v <= 5.0 for v in judge_report.means.values())
        report("evalkit-oracles PASS (20 frozen cases exact, judge means in 4 columns)")


# ---------------------------------------------------------------------------
# 7. service
# ---------------------------------------------------------------------------


class TestServiceAcceptance:
    def test_concurrent_sessions_isolated_and_ordered(self, tmp_path):
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
            "lora-retrieval": MockScript(default="结合资料分析。"),
        }
        engine = ChatEngine(
            profiles=default_profiles(),
            backend=MockBackend(scripts=scripts, default_script=MockScript(default="兜底。"), chunk_size=5),
            store=SessionStore(tmp_path / "sessions"),
            kb=_synthetic_kb(),
            limits=LoopLimits(max_calls=4, max_tokens=600),
        )
        client = TestClient(create_app(ServiceConfig(), engine=engine))

        experts = ["consulting", "task", "computing", "retrieval"]
        outcomes: dict[int, dict] = {}
        failures: list[Exception] = []

        def run(i: int):
            expert = experts[i % 4]
            message = "营收增长多少？" if expert == "computing" else f"会话{i}的问题，planted00{i % 10} 动态？"
            try:
                outcomes[i] = client.post(
                    "/chat?stream=false", json={"message": message, "expert": expert}
                ).json()
            except Exception as exc:  # pragma: no cover
                failures.append(exc)

        threads = [threading.Thread(target=run, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert not failures
        assert len(outcomes) == 20
        session_ids = set()
        for i, body in outcomes.items():
            expert = experts[i % 4]
            events = body["events"]
            done = events[-1]
            assert done["type"] == "done"
            assert done["payload"]["metadata"]["adapter"] == DEFAULT_ADAPTER_IDS[ExpertId(expert)]
            seqs = [e["seq"] for e in events]
            assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
            for kind in ("tool_result",):
                for j, event in enumerate(events):
                    if event["type"] == kind:
                        assert any(
                            e["type"] == "tool_call" and e["seq"] < event["seq"] for e in events[:j]
                        )
            session_ids.add(body["session_id"])
        assert len(session_ids) == 20
        report("service PASS (20 concurrent sessions: adapter isolation + event ordering)")
