"""Command-line interface.

    finexpert serve      --config cfg.json [--static-dir frontend/dist]
    finexpert chat       --message 你好 [--expert computing] [--config cfg.json]
    finexpert route      --query 请计算增长率
    finexpert tools      Calculator "2+3*4"
    finexpert ingest     corpus.jsonl --index-dir kb-index
    finexpert retrieve   --query 央行降息 --top-k 3 [--index-dir kb-index]
    finexpert make-data  --category computing --n 100 --seed 7 --out out.jsonl
    finexpert eval       --task task.jsonl --out report.json [--judge mock]

Tool errors exit with status 2; usage errors with 2 via argparse; everything
else returns 0 on success.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .. import fintools
from ..evalkit import TaskFormatError, load_task, run_benchmark
from ..experts import ExpertId, default_profiles, load_profiles, route
from ..factory import (
    Category,
    MockTeacher,
    TeacherBudgetExceeded,
    default_seeds,
    default_templates,
    gen_computing,
    gen_consulting_qa,
    gen_retrieval_enhanced,
    gen_self_chat,
    load_seed_file,
    write_records,
    write_rejects,
)
from ..fintools.errors import ToolError
from ..knowledge import Bm25Index, ingest as kb_ingest
from ..toolcall import LoopLimits
from .app import TOOL_EXECUTORS, build_engine, create_app
from .config import ConfigError, ServiceConfig, load_config

SEEDED_RUN_TIMESTAMP = "1970-01-01T00:00:00Z"


def _load_service_config(path: str | None) -> ServiceConfig:
    if not path:
        return ServiceConfig()
    return load_config(path)


def cmd_serve(args) -> int:
    import uvicorn

    config = _load_service_config(args.config)
    app = create_app(config, static_dir=args.static_dir)
    uvicorn.run(app, host=config.listen.host, port=config.listen.port, log_level="info")
    return 0


def cmd_chat(args) -> int:
    config = _load_service_config(args.config)
    engine = build_engine(config)
    explicit = ExpertId(args.expert) if args.expert and args.expert != "auto" else None

    def one_turn(session, text: str) -> None:
        for event in engine.run_turn(session, text, explicit):
            if event.type == "token":
                print(event.payload["text"], end="", flush=True)
            elif event.type == "route":
                print(f"[route → {event.payload['expert']} ({event.payload['source']})]")
            elif event.type == "tool_call":
                print(f"\n[tool_call {event.payload['tool']}({event.payload['args']})]", flush=True)
            elif event.type == "tool_result":
                print(f"[tool_result → {event.payload['rendered']}]", flush=True)
            elif event.type == "retrieval":
                print(f"[retrieval: {len(event.payload['results'])} passages]")
            elif event.type == "error":
                print(f"\n[error: {event.payload['message']}]", file=sys.stderr)
            elif event.type == "done":
                print()

    session = engine.store.create(expert=args.expert)
    if args.message:
        one_turn(session, args.message)
        return 0
    print("finexpert chat — empty line exits")
    while True:
        try:
            line = input("> ").strip()
        except (EOFError, KeyboardInterrupt):
            break
        if not line:
            break
        one_turn(session, line)
    return 0


def cmd_route(args) -> int:
    config = _load_service_config(args.config)
    profiles = (
        load_profiles(config.experts.profiles_path)
        if config.experts.profiles_path
        else default_profiles()
    )
    decision = route(args.query, None, profiles)
    print(
        json.dumps(
            {
                "expert": decision.expert.value,
                "source": decision.source,
                "matched": decision.matched,
                "scores": {k.value: v for k, v in decision.scores.items()},
            },
            ensure_ascii=False,
            indent=2,
        )
    )
    return 0


def cmd_tools(args) -> int:
    executor = TOOL_EXECUTORS.get(args.name)
    if executor is None:
        print(f"unknown tool {args.name!r}; available: {', '.join(TOOL_EXECUTORS)}", file=sys.stderr)
        return 2
    try:
        outcome = executor(args.input)
    except ToolError as exc:
        print(f"ERROR: {exc.kind}: {exc}", file=sys.stderr)
        return 2
    print(outcome.rendered)
    return 0


def cmd_ingest(args) -> int:
    index_dir = args.index_dir or "kb-index"
    _, stats = kb_ingest(args.corpus, index_dir=index_dir, max_chunk_tokens=args.max_chunk_tokens)
    print(json.dumps(stats.to_dict(), ensure_ascii=False))
    return 0


def cmd_retrieve(args) -> int:
    index = Bm25Index.load(args.index_dir or "kb-index")
    results = index.retrieve(args.query, top_k=args.top_k, threshold=args.threshold)
    for result in results:
        print(
            json.dumps(
                {
                    "doc_id": result.chunk.doc_id,
                    "seq": result.chunk.seq,
                    "score": round(result.score, 6),
                    "text": result.chunk.text,
                },
                ensure_ascii=False,
            )
        )
    return 0


def cmd_make_data(args) -> int:
    config = _load_service_config(args.config)
    rng = random.Random(args.seed)
    generated_at = SEEDED_RUN_TIMESTAMP if args.seed is not None else ""
    templates = default_templates()
    teacher_budget = config.factory.budget
    if config.factory.teacher_script_path:
        teacher = MockTeacher.from_file(config.factory.teacher_script_path, budget=teacher_budget)
    else:
        teacher = MockTeacher(default="（示例回答）", budget=teacher_budget)

    category = Category(args.category)
    rejects: list = []
    try:
        if category is Category.CONSULTING:
            inputs = args.inputs or ["市盈率", "可转债", "杠杆收购", "流动性", "久期"]
            records = gen_consulting_qa(
                inputs, teacher, n=args.n, templates=templates, rng=rng, generated_at=generated_at
            )
        elif category is Category.COMPUTING:
            seeds = load_seed_file(config.factory.seeds_path) if config.factory.seeds_path else default_seeds()
            records = gen_computing(
                seeds, teacher, target_n=args.n, templates=templates, rng=rng,
                rejects=rejects, generated_at=generated_at,
            )
        elif category is Category.RETRIEVAL_ENHANCED:
            if not args.index_dir:
                print("--index-dir is required for retrieval_enhanced", file=sys.stderr)
                return 2
            kb = Bm25Index.load(args.index_dir)
            records = gen_retrieval_enhanced(
                kb, teacher, target_n=args.n,
                category_mix=config.factory.category_mix or None,
                templates=templates, rng=rng,
                top_k=config.factory.top_k, noise_prob=config.factory.noise_prob,
                guarantee_prob=config.factory.guarantee_prob, generated_at=generated_at,
            )
        else:  # task: self-chat over supplied topics
            topics = args.inputs or ["基金定投", "汇率波动"]
            records = []
            for i in range(args.n):
                topic = topics[i % len(topics)]
                records.append(
                    gen_self_chat(
                        topic, context="", n_turns=config.factory.n_turns, teacher=teacher,
                        templates=templates, record_id=f"selfchat-{i:06d}", rejects=rejects,
                        generated_at=generated_at,
                    )
                )
    except TeacherBudgetExceeded as exc:
        print(f"teacher budget exhausted; writing {len(exc.partial)} records", file=sys.stderr)
        records = exc.partial

    out = Path(args.out)
    write_records(out, records)
    if rejects:
        write_rejects(out.with_suffix(out.suffix + ".rejects"), rejects)
    print(json.dumps({"written": len(records), "rejected": len(rejects), "out": str(out)}))
    return 0


def cmd_eval(args) -> int:
    config = _load_service_config(args.config)
    engine = build_engine(config)
    try:
        task = load_task(args.task)
    except TaskFormatError as exc:
        print(f"bad task file: {exc}", file=sys.stderr)
        return 2
    judge = None
    if task.kind == "judge_scored":
        if args.judge == "mock":
            if config.eval.judge_script_path:
                judge = MockTeacher.from_file(config.eval.judge_script_path)
            else:
                judge = MockTeacher(default="accuracy:4 usefulness:4 linguistic:4 reflectiveness:4")
        else:
            print("remote judge requires a configured teacher endpoint; use --judge mock", file=sys.stderr)
            return 2
    report = run_benchmark(
        task,
        engine.profiles,
        engine.backend,
        kb=engine.kb,
        judge=judge,
        limits=LoopLimits(max_calls=config.limits.max_calls, max_tokens=config.limits.max_tokens),
        config_snapshot={"backend": config.backend.kind, "task": str(args.task)},
    )
    if args.out:
        report.save(args.out)
    print(json.dumps(report.aggregate, ensure_ascii=False, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finexpert", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None)
    p.add_argument("--static-dir", default=None, help="directory with built console assets")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("chat", help="chat in the terminal")
    p.add_argument("--message", default=None, help="one-shot message (omit for a REPL)")
    p.add_argument("--expert", default=None, choices=[e.value for e in ExpertId] + ["auto"])
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("route", help="show the routing decision for a query")
    p.add_argument("--query", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("tools", help="run a calculation tool")
    p.add_argument("name", choices=sorted(TOOL_EXECUTORS))
    p.add_argument("input")
    p.set_defaults(func=cmd_tools)

    p = sub.add_parser("ingest", help="build the knowledge-base index from a corpus file")
    p.add_argument("corpus")
    p.add_argument("--index-dir", default=None)
    p.add_argument("--max-chunk-tokens", type=int, default=256)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("retrieve", help="query the knowledge-base index")
    p.add_argument("--query", required=True)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--index-dir", default=None)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("make-data", help="construct instruction records")
    p.add_argument("--category", required=True, choices=[c.value for c in Category])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--index-dir", default=None)
    p.add_argument("--inputs", nargs="*", default=None, help="terms/questions/topics")
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser("eval", help="run a benchmark task file")
    p.add_argument("--task", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--judge", default="mock", choices=["mock", "remote"])
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except fintools.ToolError as exc:
        print(f"ERROR: {exc.kind}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
