"""Benchmark runner: answers every task item through the routed pipeline and
aggregates the task's metric. Reports serialize deterministically, so a rerun
with the same mocks, seed and config reproduces the report byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..backend.base import GenerationBackend
from ..experts import ExpertId, Profiles, plan, route
from ..knowledge.index import Bm25Index
from ..toolcall import LoopLimits, ToolRegistry, default_registry, run_tool_loop
from ..factory.teacher import Teacher
from .computing import ComputingItem, aggregate_computing, score_computing
from .judge import judge_batch
from .metrics import score_accuracy, score_f1, score_rouge_l

TASK_KINDS = (
    "classification",
    "extraction",
    "summarization",
    "multiple_choice",
    "computing",
    "judge_scored",
)

_KIND_TO_EXPERT = {
    "classification": ExpertId.TASK,
    "extraction": ExpertId.TASK,
    "summarization": ExpertId.TASK,
    "multiple_choice": ExpertId.TASK,
    "computing": ExpertId.COMPUTING,
    "judge_scored": ExpertId.RETRIEVAL,
}


class TaskFormatError(Exception):
    pass


@dataclass
class EvalTask:
    id: str
    kind: str
    items: list[dict]

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise TaskFormatError(f"unknown task kind {self.kind!r}")
        if not self.items:
            raise TaskFormatError("task has no items")
        if self.kind == "multiple_choice":
            for i, item in enumerate(self.items):
                if item.get("gold") not in item.get("choices", []):
                    raise TaskFormatError(f"item {i}: gold not among choices")


def load_task(path: str | Path) -> EvalTask:
    """Line-delimited task file: a header record, then one item per line."""
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise TaskFormatError(f"empty task file {path}")
    try:
        header = json.loads(lines[0])
        items = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise TaskFormatError(f"malformed task file {path}: {exc}") from exc
    if "task" not in header or "kind" not in header:
        raise TaskFormatError("task header needs 'task' and 'kind' fields")
    return EvalTask(id=header["task"], kind=header["kind"], items=items)


@dataclass
class EvalReport:
    task: str
    kind: str
    metric: str
    aggregate: dict
    rows: list[dict]
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "task": self.task,
                "kind": self.kind,
                "metric": self.metric,
                "aggregate": self.aggregate,
                "rows": self.rows,
                "config": self.config,
            },
            ensure_ascii=False,
            sort_keys=True,
            indent=2,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def extract_choice(reply: str, choices: list[str]) -> str | None:
    """First standalone choice letter in the reply; None when absent."""
    pattern = re.compile(r"[A-Za-z]")
    for i, ch in enumerate(reply):
        if ch.upper() not in choices:
            continue
        prev_is_letter = i > 0 and pattern.match(reply[i - 1])
        next_is_letter = i + 1 < len(reply) and pattern.match(reply[i + 1])
        if not prev_is_letter and not next_is_letter:
            return ch.upper()
    return None


def _generate(backend: GenerationBackend, prompt: str, adapter, limits: LoopLimits,
              registry: ToolRegistry, use_tools: bool):
    """One answer through the tool loop (the loop degenerates to plain
    generation when the emission has no commands)."""
    reg = registry if use_tools else ToolRegistry({})
    result = run_tool_loop(backend, prompt, reg, limits, adapter=adapter)
    return result


def run_benchmark(
    task: EvalTask,
    profiles: Profiles,
    backend: GenerationBackend,
    registry: ToolRegistry | None = None,
    kb: Bm25Index | None = None,
    judge: Teacher | None = None,
    limits: LoopLimits = LoopLimits(),
    top_k: int = 3,
    threshold: float = 0.0,
    config_snapshot: dict | None = None,
) -> EvalReport:
    registry = registry or default_registry()
    expert = _KIND_TO_EXPERT[task.kind]
    rows: list[dict] = []

    def answer(query: str) -> str:
        decision = route(query, explicit=expert, profiles=profiles)
        execution = plan(decision, profiles, query)
        prompt = execution.prompt
        if execution.retrieval is not None and kb is not None:
            results = kb.retrieve(query, top_k=top_k, threshold=threshold)
            from ..experts import build_retrieval_prompt

            prompt = build_retrieval_prompt(
                profiles[decision.expert].preamble, [r.chunk.text for r in results], query
            )
        result = _generate(backend, prompt, execution.adapter, limits, registry, execution.use_tools)
        return result.transcript

    if task.kind == "computing":
        computing_rows = []
        for item in task.items:
            gold = ComputingItem(
                question=item["question"],
                gold_formula=item["gold_formula"],
                gold_result=float(item["gold_result"]),
                tolerance=float(item.get("tolerance", 1e-6)),
            )
            transcript = answer(gold.question)
            scores = score_computing(transcript, None, gold)
            computing_rows.append(scores)
            rows.append({"input": gold.question, "pred": transcript, **scores})
        aggregate = aggregate_computing(computing_rows)
        metric = "formula_acc"

    elif task.kind == "multiple_choice":
        preds, golds = [], []
        for item in task.items:
            reply = answer(item["input"])
            choice = extract_choice(reply, item["choices"])
            pred = choice if choice is not None else "<none>"
            preds.append(pred)
            golds.append(item["gold"])
            rows.append({"input": item["input"], "pred": pred, "gold": item["gold"], "reply": reply})
        aggregate = {"accuracy": score_accuracy(preds, golds)}
        metric = "accuracy"

    elif task.kind == "classification":
        preds, golds = [], []
        for item in task.items:
            reply = answer(item["input"])
            preds.append(reply)
            golds.append(item["gold"])
            rows.append({"input": item["input"], "pred": reply, "gold": item["gold"]})
        aggregate = {"accuracy": score_accuracy(preds, golds)}
        metric = "accuracy"

    elif task.kind == "extraction":
        f1_sum = 0.0
        for item in task.items:
            reply = answer(item["input"])
            scores = score_f1(reply, item["gold"])
            f1_sum += scores["f1"]
            rows.append({"input": item["input"], "pred": reply, "gold": item["gold"], **scores})
        aggregate = {"f1": f1_sum / len(task.items)}
        metric = "f1"

    elif task.kind == "summarization":
        f_sum = 0.0
        for item in task.items:
            reply = answer(item["input"])
            scores = score_rouge_l(reply, item["gold"])
            f_sum += scores["f"]
            rows.append({"input": item["input"], "pred": reply, "gold": item["gold"], **scores})
        aggregate = {"rouge_l": f_sum / len(task.items)}
        metric = "rouge"

    elif task.kind == "judge_scored":
        if judge is None:
            raise TaskFormatError("judge_scored task needs a judge client")
        judged_items = []
        for item in task.items:
            query = item["input"]
            references = item.get("references", "")
            if kb is not None and not references:
                results = kb.retrieve(query, top_k=top_k, threshold=threshold)
                references = "\n".join(f"[{i + 1}] {r.chunk.text}" for i, r in enumerate(results))
            reply = answer(query)
            judged_items.append({"question": query, "references": references, "answer": reply})
        report = judge_batch(judged_items, judge)
        for item, row in zip(judged_items, report.rows):
            rows.append({"input": item["question"], "pred": item["answer"], **row})
        aggregate = {**report.means, "failures": report.failures}
        metric = "judge_scores"

    else:  # pragma: no cover - TASK_KINDS guards this
        raise TaskFormatError(f"unhandled task kind {task.kind!r}")

    return EvalReport(
        task=task.id,
        kind=task.kind,
        metric=metric,
        aggregate=aggregate,
        rows=rows,
        config=dict(sorted((config_snapshot or {}).items())),
    )
