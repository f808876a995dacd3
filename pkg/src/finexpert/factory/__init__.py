"""Instruction dataset construction pipelines."""

from .computing import SeedTask, default_seeds, gen_computing, load_seed_file, validate_commands
from .consulting import gen_consulting_qa, gen_self_chat, rewrite_qa
from .errors import EmptyInput, EmptyKnowledgeBase, InsufficientSamplesForFewShot, ValidationFailed
from .records import (
    Category,
    InstructionRecord,
    Message,
    RejectedCandidate,
    read_records,
    validate_record,
    write_records,
    write_rejects,
)
from .retrieval import DEFAULT_CATEGORY_MIX, allocate_categories, gen_retrieval_enhanced
from .tasks import gen_reading_comprehension, gen_task_instructions
from .teacher import (
    MalformedTeacherOutput,
    MockTeacher,
    ReplayMismatch,
    ReplayTeacher,
    Teacher,
    TeacherBudgetExceeded,
    TeacherRule,
)
from .templates import PromptTemplate, SlotMismatch, TemplateRegistry, default_templates

__all__ = [
    "Category",
    "DEFAULT_CATEGORY_MIX",
    "EmptyInput",
    "EmptyKnowledgeBase",
    "InstructionRecord",
    "InsufficientSamplesForFewShot",
    "MalformedTeacherOutput",
    "Message",
    "MockTeacher",
    "PromptTemplate",
    "RejectedCandidate",
    "ReplayMismatch",
    "ReplayTeacher",
    "SeedTask",
    "SlotMismatch",
    "Teacher",
    "TeacherBudgetExceeded",
    "TeacherRule",
    "TemplateRegistry",
    "ValidationFailed",
    "allocate_categories",
    "default_seeds",
    "default_templates",
    "gen_computing",
    "gen_consulting_qa",
    "gen_reading_comprehension",
    "gen_retrieval_enhanced",
    "gen_self_chat",
    "gen_task_instructions",
    "load_seed_file",
    "read_records",
    "rewrite_qa",
    "validate_commands",
    "validate_record",
    "write_records",
    "write_rejects",
]
