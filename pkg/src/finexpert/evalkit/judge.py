"""Judge-based scoring of reference-grounded answers on four criteria:
accuracy, usefulness, linguistic quality, reflectiveness (1-5 each)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..factory.teacher import Teacher
from ..factory.templates import TemplateRegistry, default_templates

JUDGE_METRICS = ("accuracy", "usefulness", "linguistic", "reflectiveness")


class JudgeFailure(Exception):
    pass


@dataclass
class JudgeVerdict:
    scores: dict[str, float]
    rationale: str = ""

    def __post_init__(self):
        missing = [m for m in JUDGE_METRICS if m not in self.scores]
        if missing:
            raise ValueError(f"verdict missing metrics {missing}")
        bad = {m: v for m, v in self.scores.items() if not 1.0 <= v <= 5.0}
        if bad:
            raise ValueError(f"scores out of [1, 5]: {bad}")


_SCORE_PATTERNS = {
    metric: re.compile(rf"{metric}\s*[:：]\s*([1-5](?:\.\d+)?)", re.IGNORECASE)
    for metric in JUDGE_METRICS
}
_RATIONALE = re.compile(r"理由[:：]\s*(.+)", re.DOTALL)


def parse_verdict(reply: str) -> JudgeVerdict | None:
    scores: dict[str, float] = {}
    for metric, pattern in _SCORE_PATTERNS.items():
        match = pattern.search(reply)
        if not match:
            return None
        scores[metric] = float(match.group(1))
    rationale_match = _RATIONALE.search(reply)
    return JudgeVerdict(scores=scores, rationale=rationale_match.group(1).strip() if rationale_match else "")


def score_with_judge(
    question: str,
    references: str,
    answer: str,
    judge: Teacher,
    templates: TemplateRegistry | None = None,
) -> JudgeVerdict:
    """Render the rubric prompt and parse four scores; one retry on
    unparseable output, then JudgeFailure."""
    templates = templates or default_templates()
    prompt = templates.get("judge-rubric-v1").render(
        question=question, references=references or "（无）", answer=answer
    )
    for _ in range(2):
        reply = judge.complete(prompt)
        verdict = parse_verdict(reply)
        if verdict is not None:
            return verdict
    raise JudgeFailure(f"judge output unparseable after retry: {reply[:120]!r}")


@dataclass
class JudgeReport:
    means: dict[str, float]
    items: int
    failures: int = 0
    rows: list[dict] = field(default_factory=list)

    def format_table(self) -> str:
        """Four-column layout: one column per criterion."""
        header = "  ".join(f"{m.capitalize():>14}" for m in JUDGE_METRICS)
        values = "  ".join(f"{self.means[m]:>14.2f}" for m in JUDGE_METRICS)
        return header + "\n" + values


def judge_batch(
    items: list[dict],
    judge: Teacher,
    templates: TemplateRegistry | None = None,
) -> JudgeReport:
    """Items: {question, references, answer}. Failed items are counted and
    excluded from the means."""
    rows = []
    failures = 0
    for item in items:
        try:
            verdict = score_with_judge(
                item["question"], item.get("references", ""), item["answer"], judge, templates
            )
            rows.append({"scores": verdict.scores, "rationale": verdict.rationale})
        except JudgeFailure:
            failures += 1
            rows.append({"scores": None, "rationale": "judge failure"})
    scored = [r["scores"] for r in rows if r["scores"]]
    means = {
        metric: (sum(s[metric] for s in scored) / len(scored)) if scored else 0.0
        for metric in JUDGE_METRICS
    }
    return JudgeReport(means=means, items=len(items), failures=failures, rows=rows)
