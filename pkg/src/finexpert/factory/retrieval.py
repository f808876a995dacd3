"""Retrieval-enhanced instructions: question generation from a source
document, reference retrieval with noise injection, then reference-grounded
answer generation.

Analysis categories are allocated by largest-remainder quota over the
configured mix and shuffled, so empirical shares match the mix up to
rounding at any target size.
"""

from __future__ import annotations

import random

from ..knowledge.index import Bm25Index
from .errors import EmptyKnowledgeBase
from .records import Category, InstructionRecord, Message
from .teacher import Teacher, TeacherBudgetExceeded
from .templates import TemplateRegistry, default_templates

DEFAULT_CATEGORY_MIX = {
    "industry": 0.53,
    "policy": 0.13,
    "investment": 0.08,
    "other": 0.26,
}

CATEGORY_LABELS = {
    "industry": "行业分析",
    "policy": "政策分析",
    "investment": "投资建议",
    "other": "其他金融场景",
}


def allocate_categories(mix: dict[str, float], n: int, rng: random.Random) -> list[str]:
    """Largest-remainder quota allocation, then a seeded shuffle."""
    if n < 1:
        return []
    total = sum(mix.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"category mix must sum to 1, got {total}")
    names = sorted(mix)
    exact = {name: mix[name] * n for name in names}
    counts = {name: int(exact[name]) for name in names}
    leftover = n - sum(counts.values())
    by_remainder = sorted(names, key=lambda name: (-(exact[name] - counts[name]), name))
    for name in by_remainder[:leftover]:
        counts[name] += 1
    sequence = [name for name in names for _ in range(counts[name])]
    rng.shuffle(sequence)
    return sequence


def gen_retrieval_enhanced(
    kb: Bm25Index,
    teacher: Teacher,
    target_n: int,
    category_mix: dict[str, float] | None = None,
    templates: TemplateRegistry | None = None,
    rng: random.Random | None = None,
    top_k: int = 3,
    threshold: float = 0.0,
    noise_prob: float = 0.25,
    guarantee_prob: float = 1.0,
    generated_at: str = "",
) -> list[InstructionRecord]:
    if not kb.documents:
        raise EmptyKnowledgeBase("knowledge base has no documents")
    if target_n < 1:
        return []
    templates = templates or default_templates()
    rng = rng or random.Random(0)
    mix = category_mix or DEFAULT_CATEGORY_MIX
    categories = allocate_categories(mix, target_n, rng)

    news_template = templates.get("retrieval-question-news-v1")
    report_template = templates.get("retrieval-question-report-v1")
    answer_template = templates.get("retrieval-answer-v1")
    doc_ids = sorted(kb.documents)

    records: list[InstructionRecord] = []
    for i, category in enumerate(categories):
        doc = kb.documents[doc_ids[rng.randrange(len(doc_ids))]]
        question_template = report_template if doc.kind == "report_abstract" else news_template
        label = CATEGORY_LABELS.get(category, category)
        try:
            question = teacher.complete(
                question_template.render(category=label, title=doc.title, body=doc.body)
            ).strip()
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc

        results = kb.retrieve_for_training(
            question,
            top_k=top_k,
            threshold=threshold,
            noise_prob=noise_prob,
            source_doc=doc.id,
            guarantee_prob=guarantee_prob,
            rng=rng,
        )
        references = "\n".join(f"[{j + 1}] {r.chunk.text}" for j, r in enumerate(results))
        try:
            answer = teacher.complete(
                answer_template.render(references=references or "（无）", question=question)
            ).strip()
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc

        records.append(
            InstructionRecord(
                id=f"retrieval-{i:06d}",
                category=Category.RETRIEVAL_ENHANCED,
                messages=[Message("human", question), Message("assistant", answer)],
                context=references or None,
                meta={
                    "source": doc.id,
                    "analysis_category": category,
                    "template_id": question_template.id,
                    "answer_template_id": answer_template.id,
                    "reference_docs": ",".join(r.chunk.doc_id for r in results),
                    "injected_docs": ",".join(r.chunk.doc_id for r in results if r.injected),
                    "guaranteed_docs": ",".join(r.chunk.doc_id for r in results if r.guaranteed),
                    "generated_at": generated_at,
                },
            )
        )
    return records
