"""Expert routing: maps each request to one of the four experts and builds
the expert-specific execution plan.

Selection policy: an explicit expert always wins; otherwise the highest
keyword-rule score; ties and all-zero scores fall back to the consulting
expert. Routing is pure and profiles are immutable after load, so everything
here is safe under unrestricted concurrency.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .backend.base import AdapterRef


class ExpertId(str, Enum):
    CONSULTING = "consulting"
    TASK = "task"
    COMPUTING = "computing"
    RETRIEVAL = "retrieval"


DEFAULT_EXPERT = ExpertId.CONSULTING

DEFAULT_ADAPTER_IDS = {
    ExpertId.CONSULTING: "lora-consulting",
    ExpertId.TASK: "lora-task",
    ExpertId.COMPUTING: "lora-computing",
    ExpertId.RETRIEVAL: "lora-retrieval",
}

DEFAULT_PREAMBLES = {
    ExpertId.CONSULTING: "你是一位专业的金融顾问，请用中文回答用户的金融咨询问题，回答专业、详实、符合中国市场环境。",
    ExpertId.TASK: "你是一位金融文本处理助手，请严格按照指令完成文本任务，只输出要求的结果。",
    ExpertId.COMPUTING: (
        "你是一位金融计算助手。遇到计算时请使用工具指令，格式为 [Calculator(表达式)→ 、"
        "[EquationSolver(方程组)→ 、[Counter(样本)→ 、[ProbabilityTable(数值)→ ，"
        "工具结果会自动填入指令之后。"
    ),
    ExpertId.RETRIEVAL: "你是一位金融分析师，请结合提供的参考资料回答问题，注意甄别无关资料，分析后给出结论。",
}


@dataclass(frozen=True)
class RoutingRule:
    pattern: str  # regex, searched in the query
    weight: float


@dataclass(frozen=True)
class ExpertProfile:
    id: ExpertId
    adapter: AdapterRef
    preamble: str
    tools_enabled: bool
    retrieval_enabled: bool
    rules: tuple[RoutingRule, ...] = ()

    def __post_init__(self):
        expected_tools = self.id is ExpertId.COMPUTING
        expected_retrieval = self.id is ExpertId.RETRIEVAL
        if self.tools_enabled != expected_tools or self.retrieval_enabled != expected_retrieval:
            raise ValueError(
                f"profile {self.id.value}: capabilities must be tools={expected_tools}, "
                f"retrieval={expected_retrieval}"
            )


@dataclass(frozen=True)
class RoutingDecision:
    expert: ExpertId
    source: str  # explicit | rule | default
    matched: str | None
    scores: dict[ExpertId, float] = field(hash=False, default_factory=dict)


@dataclass(frozen=True)
class RetrievalSpec:
    top_k: int = 3
    threshold: float = 0.0


@dataclass(frozen=True)
class ExecutionPlan:
    expert: ExpertId
    adapter: AdapterRef
    prompt: str
    use_tools: bool
    retrieval: RetrievalSpec | None


Profiles = dict[ExpertId, ExpertProfile]


def _capabilities(expert: ExpertId) -> tuple[bool, bool]:
    return (expert is ExpertId.COMPUTING, expert is ExpertId.RETRIEVAL)


def load_rule_file(path: str | Path) -> dict[ExpertId, tuple[RoutingRule, ...]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return _rules_from_dict(data)


def _rules_from_dict(data: dict) -> dict[ExpertId, tuple[RoutingRule, ...]]:
    out: dict[ExpertId, tuple[RoutingRule, ...]] = {}
    for expert in ExpertId:
        raw = data.get(expert.value, [])
        out[expert] = tuple(RoutingRule(pattern=p, weight=float(w)) for p, w in raw)
    return out


def default_rules() -> dict[ExpertId, tuple[RoutingRule, ...]]:
    text = resources.files("finexpert.data").joinpath("routing_rules.json").read_text(encoding="utf-8")
    return _rules_from_dict(json.loads(text))


def default_profiles() -> Profiles:
    rules = default_rules()
    profiles: Profiles = {}
    for expert in ExpertId:
        tools, retrieval = _capabilities(expert)
        profiles[expert] = ExpertProfile(
            id=expert,
            adapter=AdapterRef(DEFAULT_ADAPTER_IDS[expert]),
            preamble=DEFAULT_PREAMBLES[expert],
            tools_enabled=tools,
            retrieval_enabled=retrieval,
            rules=rules[expert],
        )
    return profiles


def load_profiles(path: str | Path) -> Profiles:
    """Load profiles from a JSON file; missing fields fall back to defaults.

    File shape: {"consulting": {"adapter": ..., "preamble": ..., "rules": [[pattern, weight], ...]}, ...}
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles: Profiles = {}
    for expert in ExpertId:
        section = data.get(expert.value, {})
        if not isinstance(section, dict):
            raise ValueError(f"profile section {expert.value!r} must be an object")
        tools, retrieval = _capabilities(expert)
        rules = tuple(
            RoutingRule(pattern=p, weight=float(w))
            for p, w in section.get("rules", [])
        ) or default_rules()[expert]
        profiles[expert] = ExpertProfile(
            id=expert,
            adapter=AdapterRef(section.get("adapter", DEFAULT_ADAPTER_IDS[expert])),
            preamble=section.get("preamble", DEFAULT_PREAMBLES[expert]),
            tools_enabled=tools,
            retrieval_enabled=retrieval,
            rules=rules,
        )
    return profiles


def route(query: str, explicit: ExpertId | None, profiles: Profiles) -> RoutingDecision:
    """Total routing function: every query routes somewhere."""
    missing = [e.value for e in ExpertId if e not in profiles]
    if missing:
        raise ValueError(f"profiles missing experts: {missing}")

    scores: dict[ExpertId, float] = {}
    best_pattern: dict[ExpertId, str | None] = {}
    for expert in ExpertId:
        total = 0.0
        best: tuple[float, str] | None = None
        for rule in profiles[expert].rules:
            if re.search(rule.pattern, query):
                total += rule.weight
                if best is None or rule.weight > best[0]:
                    best = (rule.weight, rule.pattern)
        scores[expert] = total
        best_pattern[expert] = best[1] if best else None

    if explicit is not None:
        return RoutingDecision(expert=explicit, source="explicit", matched=None, scores=scores)

    top = max(scores.values())
    winners = [e for e in ExpertId if scores[e] == top]
    if top <= 0.0 or len(winners) > 1:
        return RoutingDecision(expert=DEFAULT_EXPERT, source="default", matched=None, scores=scores)
    winner = winners[0]
    return RoutingDecision(expert=winner, source="rule", matched=best_pattern[winner], scores=scores)


def plan(decision: RoutingDecision, profiles: Profiles, query: str,
         retrieval_spec: RetrievalSpec | None = None) -> ExecutionPlan:
    """Assemble the execution plan for a routed query."""
    profile = profiles[decision.expert]
    return ExecutionPlan(
        expert=decision.expert,
        adapter=profile.adapter,
        prompt=build_prompt(profile.preamble, query),
        use_tools=profile.tools_enabled,
        retrieval=(retrieval_spec or RetrievalSpec()) if profile.retrieval_enabled else None,
    )


def build_prompt(preamble: str, query: str) -> str:
    return f"{preamble}\n\n{query}" if preamble else query


def build_retrieval_prompt(preamble: str, references: list[str], query: str) -> str:
    """Prompt assembly for retrieve-then-generate plans."""
    numbered = "\n".join(f"[{i + 1}] {text}" for i, text in enumerate(references))
    body = f"参考资料：\n{numbered}\n\n问题：{query}" if numbered else f"问题：{query}"
    return f"{preamble}\n\n{body}" if preamble else body
