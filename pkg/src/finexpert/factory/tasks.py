"""Task instructions from labeled datasets, and reading comprehension from
unlabeled chunks."""

from __future__ import annotations

import random

from ..knowledge.segment import Chunk
from .errors import EmptyInput, InsufficientSamplesForFewShot
from .records import Category, InstructionRecord, Message
from .teacher import Teacher, TeacherBudgetExceeded
from .templates import PromptTemplate, TemplateRegistry, default_templates


def gen_task_instructions(
    samples: list[dict],
    template: PromptTemplate,
    few_shot_k: int = 0,
    rng: random.Random | None = None,
    generated_at: str = "",
) -> list[InstructionRecord]:
    """One record per sample. Samples are dicts whose fields fill the
    template's slots plus a ``label``; the label is verbalized per the
    template's verbalizer map.

    With few_shot_k > 0 each prompt embeds k demonstrations drawn without
    replacement from the other samples.
    """
    if not samples:
        raise EmptyInput("no samples")
    if few_shot_k > 0 and len(samples) < few_shot_k + 1:
        raise InsufficientSamplesForFewShot(
            f"few-shot k={few_shot_k} needs at least {few_shot_k + 1} samples, got {len(samples)}"
        )
    rng = rng or random.Random(0)

    records = []
    for i, sample in enumerate(samples):
        fields = {k: v for k, v in sample.items() if k != "label"}
        slots = dict(fields)
        if few_shot_k > 0:
            others = [s for j, s in enumerate(samples) if j != i]
            demos = rng.sample(others, few_shot_k)
            slots["demonstrations"] = "".join(
                template.render_demo(
                    **{k: v for k, v in demo.items() if k != "label"},
                    label=template.verbalize(demo["label"]),
                )
                for demo in demos
            )
        human = template.render(**slots)
        assistant = template.verbalize(sample["label"])
        records.append(
            InstructionRecord(
                id=f"task-{template.id}-{i:06d}",
                category=Category.TASK,
                messages=[Message("human", human), Message("assistant", assistant)],
                meta={
                    "source": str(sample.get("source", "")),
                    "template_id": template.id,
                    "few_shot_k": str(few_shot_k),
                    "generated_at": generated_at,
                },
            )
        )
    return records


def gen_reading_comprehension(
    chunks: list[Chunk | str],
    teacher: Teacher,
    templates: TemplateRegistry | None = None,
    generated_at: str = "",
) -> list[InstructionRecord]:
    """Per chunk: the teacher writes a question, then answers it against the
    chunk; the record keeps the chunk as its context. Two teacher calls per
    chunk."""
    if not chunks:
        raise EmptyInput("no chunks")
    templates = templates or default_templates()
    question_template = templates.get("task-reading-question-v1")
    answer_template = templates.get("task-reading-answer-v1")

    records = []
    for i, chunk in enumerate(chunks):
        paragraph = chunk.text if isinstance(chunk, Chunk) else chunk
        try:
            question = teacher.complete(question_template.render(paragraph=paragraph)).strip()
            answer = teacher.complete(
                answer_template.render(paragraph=paragraph, question=question)
            ).strip()
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc
        human = answer_template.render(paragraph=paragraph, question=question)
        records.append(
            InstructionRecord(
                id=f"reading-{i:06d}",
                category=Category.TASK,
                messages=[Message("human", human), Message("assistant", answer)],
                context=paragraph,
                meta={
                    "source": chunk.doc_id if isinstance(chunk, Chunk) else "",
                    "template_id": answer_template.id,
                    "question_template_id": question_template.id,
                    "generated_at": generated_at,
                },
            )
        )
    return records
