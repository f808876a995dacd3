"""Consulting instructions: term QA, multi-turn self-chat, and QA rewriting.

Term QA keeps the human side templated (the term is slotted into one of the
question templates, so every record provably mentions its term) and spends
one teacher call on the answer. Self-chat grows a dialogue one turn per
teacher call, feeding the accumulated history back into each prompt.
"""

from __future__ import annotations

import random
import re

from .errors import EmptyInput
from .records import Category, InstructionRecord, Message, RejectedCandidate
from .teacher import MalformedTeacherOutput, Teacher, TeacherBudgetExceeded
from .templates import TemplateRegistry, default_templates

_QUESTION_TEMPLATE_IDS = (
    "consulting-term-question-v1",
    "consulting-term-question-v2",
    "consulting-term-question-v3",
)

_PAIR = re.compile(r"问[:：]\s*(?P<q>.+?)\s*\n答[:：]\s*(?P<a>.+)", re.DOTALL)


def _looks_like_question(text: str) -> bool:
    return "?" in text or "？" in text


def gen_consulting_qa(
    terms_or_questions: list[str],
    teacher: Teacher,
    n: int,
    templates: TemplateRegistry | None = None,
    rng: random.Random | None = None,
    generated_at: str = "",
) -> list[InstructionRecord]:
    """n single-turn QA records; inputs cycle when n exceeds them.

    A term input gets a templated question plus a teacher-written answer; an
    input that already is a question goes straight to answer generation.
    """
    if n < 1 or not terms_or_questions:
        raise EmptyInput("need at least one input and n >= 1")
    templates = templates or default_templates()
    rng = rng or random.Random(0)
    answer_template = templates.get("consulting-answer-v1")

    records: list[InstructionRecord] = []
    for i in range(n):
        source = terms_or_questions[i % len(terms_or_questions)]
        if _looks_like_question(source):
            question = source
            question_template_id = ""
        else:
            question_template_id = _QUESTION_TEMPLATE_IDS[rng.randrange(len(_QUESTION_TEMPLATE_IDS))]
            question = templates.get(question_template_id).render(term=source)
        try:
            answer = teacher.complete(answer_template.render(question=question))
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc
        records.append(
            InstructionRecord(
                id=f"consulting-{i:06d}",
                category=Category.CONSULTING,
                messages=[Message("human", question), Message("assistant", answer)],
                meta={
                    "source": source,
                    "template_id": question_template_id or "consulting-answer-v1",
                    "answer_template_id": "consulting-answer-v1",
                    "generated_at": generated_at,
                },
            )
        )
    return records


def gen_self_chat(
    topic: str,
    context: str,
    n_turns: int,
    teacher: Teacher,
    templates: TemplateRegistry | None = None,
    record_id: str = "selfchat-000000",
    rejects: list[RejectedCandidate] | None = None,
    generated_at: str = "",
) -> InstructionRecord:
    """One multi-turn record with exactly 2*n_turns alternating messages."""
    if n_turns < 1:
        raise EmptyInput("n_turns must be >= 1")
    templates = templates or default_templates()
    turn_template = templates.get("consulting-selfchat-turn-v1")

    messages: list[Message] = []
    history = ""
    for turn in range(n_turns):
        prompt = turn_template.render(topic=topic, context=context, history=history or "（无）")
        pair = None
        for _ in range(2):  # one retry on malformed output
            reply = teacher.complete(prompt)
            pair = _PAIR.search(reply)
            if pair:
                break
        if not pair:
            if rejects is not None:
                rejects.append(
                    RejectedCandidate(
                        reason="malformed self-chat turn",
                        payload={"topic": topic, "turn": turn, "reply": reply},
                    )
                )
            raise MalformedTeacherOutput(f"turn {turn}: could not parse a 问/答 pair")
        question, answer = pair.group("q").strip(), pair.group("a").strip()
        messages.append(Message("human", question))
        messages.append(Message("assistant", answer))
        history += f"问：{question}\n答：{answer}\n"

    return InstructionRecord(
        id=record_id,
        category=Category.CONSULTING,
        messages=messages,
        context=context or None,
        meta={
            "source": topic,
            "template_id": "consulting-selfchat-turn-v1",
            "turns": str(n_turns),
            "generated_at": generated_at,
        },
    )


def rewrite_qa(
    qa_pairs: list[tuple[str, str]],
    teacher: Teacher,
    templates: TemplateRegistry | None = None,
    generated_at: str = "",
) -> list[InstructionRecord]:
    """Regenerate existing QA pairs through the teacher (the path used to
    localize a foreign-language QA corpus)."""
    if not qa_pairs:
        raise EmptyInput("no QA pairs given")
    templates = templates or default_templates()
    template = templates.get("consulting-rewrite-v1")
    records = []
    for i, (question, answer) in enumerate(qa_pairs):
        try:
            reply = teacher.complete(template.render(question=question, answer=answer))
        except TeacherBudgetExceeded as exc:
            raise TeacherBudgetExceeded(str(exc), partial=records) from exc
        pair = _PAIR.search(reply)
        if not pair:
            raise MalformedTeacherOutput(f"pair {i}: could not parse rewritten 问/答")
        records.append(
            InstructionRecord(
                id=f"consulting-rewrite-{i:06d}",
                category=Category.CONSULTING,
                messages=[
                    Message("human", pair.group("q").strip()),
                    Message("assistant", pair.group("a").strip()),
                ],
                meta={
                    "source": question,
                    "template_id": "consulting-rewrite-v1",
                    "generated_at": generated_at,
                },
            )
        )
    return records
