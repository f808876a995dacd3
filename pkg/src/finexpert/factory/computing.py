"""Computing instructions by self-instruction over a seed task pool.

Every candidate answer is validated by re-execution: each embedded command
is re-run and must reproduce its embedded rendered result exactly. Accepted
QA pairs rejoin the sampling pool; rejected candidates are kept with their
reasons for audit.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..toolcall import ToolRegistry, default_registry, parse_embedded
from ..toolcall.registry import UnknownTool
from ..fintools.errors import ToolError
from .errors import EmptyInput
from .records import Category, InstructionRecord, Message, RejectedCandidate
from .teacher import Teacher, TeacherBudgetExceeded
from .templates import TemplateRegistry, default_templates

_QA = re.compile(r"问题[:：]\s*(?P<q>.+?)\s*\n解答[:：]\s*(?P<a>.+)", re.DOTALL)


@dataclass(frozen=True)
class SeedTask:
    id: str
    question: str
    answer_with_commands: str
    origin: str  # finance_exam | report_context | general_math


def load_seed_file(path: str | Path) -> list[SeedTask]:
    seeds = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                record = json.loads(line)
                seeds.append(
                    SeedTask(
                        id=record["id"],
                        question=record["question"],
                        answer_with_commands=record["answer_with_commands"],
                        origin=record.get("origin", "finance_exam"),
                    )
                )
    return seeds


def default_seeds() -> list[SeedTask]:
    text = resources.files("finexpert.data").joinpath("seed_tasks.jsonl").read_text(encoding="utf-8")
    seeds = []
    for line in text.splitlines():
        if line.strip():
            record = json.loads(line)
            seeds.append(
                SeedTask(
                    id=record["id"],
                    question=record["question"],
                    answer_with_commands=record["answer_with_commands"],
                    origin=record.get("origin", "finance_exam"),
                )
            )
    return seeds


def validate_commands(answer: str, registry: ToolRegistry | None = None) -> list[str]:
    """Re-execution validator; returns problems (empty = valid)."""
    registry = registry or default_registry()
    embedded = parse_embedded(answer)
    if not embedded:
        return ["no well-formed embedded tool command"]
    problems = []
    for command, embedded_result in embedded:
        try:
            recomputed = registry.execute(command.tool, command.args).rendered
        except ToolError as exc:
            recomputed = f"ERROR: {exc.kind}"
        except UnknownTool:
            problems.append(f"unknown tool {command.tool!r}")
            continue
        if recomputed != embedded_result:
            problems.append(
                f"{command.tool}({command.args}): embedded {embedded_result!r} != recomputed {recomputed!r}"
            )
    return problems


def gen_computing(
    seeds: list[SeedTask],
    teacher: Teacher,
    target_n: int,
    templates: TemplateRegistry | None = None,
    registry: ToolRegistry | None = None,
    rng: random.Random | None = None,
    rejects: list[RejectedCandidate] | None = None,
    max_attempts: int | None = None,
    generated_at: str = "",
) -> list[InstructionRecord]:
    """Self-instruct loop: sample 3 pool tasks as demonstrations, ask the
    teacher for a new QA, validate by re-execution, repeat until target_n
    accepted (or the attempt cap / teacher budget ends the run)."""
    if len(seeds) < 3:
        raise EmptyInput("self-instruction needs at least 3 seed tasks")
    if target_n < 1:
        raise EmptyInput("target_n must be >= 1")
    templates = templates or default_templates()
    registry = registry or default_registry()
    rng = rng or random.Random(0)
    template = templates.get("computing-selfinstruct-v1")
    if max_attempts is None:
        max_attempts = max(20, target_n * 10)

    pool: list[tuple[str, str, str]] = [(s.id, s.question, s.answer_with_commands) for s in seeds]
    records: list[InstructionRecord] = []
    attempts = 0
    while len(records) < target_n and attempts < max_attempts:
        attempts += 1
        demos = rng.sample(pool, 3)
        demonstrations = "".join(
            template.render_demo(question=q, answer=a) for _, q, a in demos
        )
        prompt = template.render(demonstrations=demonstrations)
        try:
            reply = teacher.complete(prompt)
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc

        pair = _QA.search(reply)
        if not pair:
            if rejects is not None:
                rejects.append(RejectedCandidate(reason="unparseable QA", payload={"reply": reply}))
            continue
        question, answer = pair.group("q").strip(), pair.group("a").strip()
        problems = validate_commands(answer, registry)
        if problems:
            if rejects is not None:
                rejects.append(
                    RejectedCandidate(
                        reason="; ".join(problems), payload={"question": question, "answer": answer}
                    )
                )
            continue
        record_id = f"computing-{len(records):06d}"
        records.append(
            InstructionRecord(
                id=record_id,
                category=Category.COMPUTING,
                messages=[Message("human", question), Message("assistant", answer)],
                meta={
                    "source": "self-instruct",
                    "template_id": template.id,
                    "seed_ids": ",".join(demo_id for demo_id, _, _ in demos),
                    "generated_at": generated_at,
                },
            )
        )
        pool.append((record_id, question, answer))  # accepted tasks rejoin the pool
    return records
