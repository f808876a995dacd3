"""Evaluation framework: text metrics, computing scores, judge scoring, and
the benchmark runner."""

from .computing import ComputingItem, aggregate_computing, fold_constants, formulas_equal, score_computing
from .judge import JUDGE_METRICS, JudgeFailure, JudgeReport, JudgeVerdict, judge_batch, parse_verdict, score_with_judge
from .metrics import LengthMismatch, normalize_text, overlap_tokens, score_accuracy, score_f1, score_rouge_l
from .runner import EvalReport, EvalTask, TaskFormatError, extract_choice, load_task, run_benchmark

__all__ = [
    "ComputingItem",
    "EvalReport",
    "EvalTask",
    "JUDGE_METRICS",
    "JudgeFailure",
    "JudgeReport",
    "JudgeVerdict",
    "LengthMismatch",
    "TaskFormatError",
    "aggregate_computing",
    "extract_choice",
    "fold_constants",
    "formulas_equal",
    "judge_batch",
    "load_task",
    "normalize_text",
    "overlap_tokens",
    "parse_verdict",
    "run_benchmark",
    "score_accuracy",
    "score_computing",
    "score_f1",
    "score_rouge_l",
    "score_with_judge",
]
