"""Computing evaluation: formula construction and result accuracy.

A transcript's executed commands are recovered with the embedded-command
parser. The constructed formula counts as correct when some executed
calculator expression is algebraically equal to the gold formula, judged by
structural AST equality after constant folding (which, for the closed-form
expressions these tools accept, reduces to value equality). The result
counts when the spliced result also matches the gold value within the item's
relative tolerance. Result accuracy can therefore never exceed formula
accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..fintools import MathError, ParseError, eval_expression
from ..fintools.expression import Bin, Call, Neg, Node, Num, Percent, parse_expression
from ..toolcall import SpliceEvent, parse_embedded

_FOLD_RTOL = 1e-12


@dataclass(frozen=True)
class ComputingItem:
    question: str
    gold_formula: str
    gold_result: float
    tolerance: float = 1e-6  # relative

    def __post_init__(self):
        value = eval_expression(self.gold_formula).value
        if abs(value - self.gold_result) > self.tolerance * (1.0 + abs(self.gold_result)):
            raise ValueError(
                f"gold formula {self.gold_formula!r} evaluates to {value}, not {self.gold_result}"
            )


def fold_constants(node: Node) -> Node:
    """Fold pure-constant subtrees to literals. The expression grammar has no
    free variables, so complete folding is the norm; the recursion is kept
    general for robustness."""
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        inner = fold_constants(node.operand)
        if isinstance(inner, Num):
            return Num(-inner.value)
        return Neg(inner)
    if isinstance(node, Percent):
        inner = fold_constants(node.operand)
        if isinstance(inner, Num):
            return Num(inner.value / 100.0)
        return Percent(inner)
    if isinstance(node, Bin):
        left = fold_constants(node.left)
        right = fold_constants(node.right)
        if isinstance(left, Num) and isinstance(right, Num):
            try:
                return Num(eval_expression_node(Bin(node.op, left, right)))
            except MathError:
                return Bin(node.op, left, right)
        return Bin(node.op, left, right)
    if isinstance(node, Call):
        arg = fold_constants(node.arg)
        if isinstance(arg, Num):
            try:
                return Num(eval_expression_node(Call(node.func, arg)))
            except MathError:
                return Call(node.func, arg)
        return Call(node.func, arg)
    raise TypeError(f"not an expression node: {node!r}")


def eval_expression_node(node: Node) -> float:
    from ..fintools.expression import eval_ast

    return eval_ast(node)


def _nodes_equal(a: Node, b: Node) -> bool:
    if isinstance(a, Num) and isinstance(b, Num):
        return abs(a.value - b.value) <= _FOLD_RTOL * (1.0 + max(abs(a.value), abs(b.value)))
    if type(a) is not type(b):
        return False
    if isinstance(a, Bin):
        return a.op == b.op and _nodes_equal(a.left, b.left) and _nodes_equal(a.right, b.right)
    if isinstance(a, (Neg, Percent)):
        return _nodes_equal(a.operand, b.operand)
    if isinstance(a, Call):
        return a.func == b.func and _nodes_equal(a.arg, b.arg)
    return False


def formulas_equal(candidate: str, gold: str) -> bool:
    try:
        folded_candidate = fold_constants(parse_expression(candidate))
        folded_gold = fold_constants(parse_expression(gold))
    except (ParseError, MathError):
        return False
    return _nodes_equal(folded_candidate, folded_gold)


def score_computing(
    transcript: str,
    events: list[SpliceEvent] | None,
    item: ComputingItem,
) -> dict[str, bool]:
    """Score one transcript against a gold (formula, result) pair.

    The spliced (embedded) results are what gets scored, so a transcript
    whose result text was corrupted scores formula-correct but
    result-incorrect even though re-execution would fix it.
    """
    embedded = parse_embedded(transcript)
    formula_correct = False
    result_correct = False
    for command, embedded_result in embedded:
        if command.tool != "Calculator":
            continue
        if not formulas_equal(command.args, item.gold_formula):
            continue
        formula_correct = True
        try:
            result_value = float(embedded_result)
        except ValueError:
            continue
        if abs(result_value - item.gold_result) <= item.tolerance * (1.0 + abs(item.gold_result)):
            result_correct = True
            break
    return {"formula_correct": formula_correct, "result_correct": result_correct}


def aggregate_computing(rows: list[dict[str, bool]]) -> dict[str, float]:
    """Means of the two columns; result accuracy never exceeds formula
    accuracy because result_correct implies formula_correct per item."""
    if not rows:
        return {"formula": 0.0, "formula_and_result": 0.0}
    formula = sum(1 for r in rows if r["formula_correct"]) / len(rows)
    both = sum(1 for r in rows if r["formula_correct"] and r["result_correct"]) / len(rows)
    return {"formula": formula, "formula_and_result": both}
