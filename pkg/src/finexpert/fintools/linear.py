"""Linear equation system solver.

Each equation is parsed into a linear form (constant + coefficient per
variable) using the same token grammar as the expression calculator, with
variables allowed as atoms. Any construction that would make a term
nonlinear (variable*variable, variable in an exponent, function of a
variable, division by a variable) raises NonlinearTerm.

Systems are solved by Gaussian elimination with partial pivoting on the
augmented matrix; rank defects classify the system as Inconsistent or
Underdetermined. A pivot below 1e-12 times the largest augmented entry is
treated as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import expression as ex
from .errors import Inconsistent, MathError, NonlinearTerm, ParseError, Underdetermined
from .render import ToolOutcome, outcome_from_solution

MAX_VARIABLES = 26
PIVOT_RTOL = 1e-12
RESIDUAL_RTOL = 1e-9


@dataclass
class LinearForm:
    """constant + sum(coeffs[v] * v)"""

    const: float = 0.0
    coeffs: dict[str, float] = field(default_factory=dict)

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def scaled(self, factor: float) -> "LinearForm":
        return LinearForm(self.const * factor, {v: c * factor for v, c in self.coeffs.items()})

    def plus(self, other: "LinearForm", sign: float = 1.0) -> "LinearForm":
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            coeffs[v] = coeffs.get(v, 0.0) + sign * c
        return LinearForm(self.const + sign * other.const, coeffs)


class _LinearParser:
    """Recursive descent over expression tokens, evaluating into LinearForm."""

    def __init__(self, tokens: list[ex.Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> ex.Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> ex.Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> LinearForm:
        form = self.parse_sum()
        tail = self.peek()
        if tail.kind != "END":
            raise ParseError(f"unexpected trailing input {tail.text!r}", position=tail.pos)
        return form

    def parse_sum(self) -> LinearForm:
        form = self.parse_product()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            form = form.plus(self.parse_product(), 1.0 if op == "+" else -1.0)
        return form

    def parse_product(self) -> LinearForm:
        form = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text == "*":
                self.advance()
                form = _multiply(form, self.parse_unary(), tok.pos)
            elif tok.kind == "OP" and tok.text == "/":
                self.advance()
                form = _divide(form, self.parse_unary(), tok.pos)
            else:
                return form

    def parse_unary(self) -> LinearForm:
        if self.peek().kind == "OP" and self.peek().text == "-":
            self.advance()
            return self.parse_unary().scaled(-1.0)
        return self.parse_power()

    def parse_power(self) -> LinearForm:
        base = self.parse_postfix()
        if self.peek().kind == "OP" and self.peek().text == "^":
            tok = self.advance()
            exponent = self.parse_unary()
            if not base.is_const or not exponent.is_const:
                raise NonlinearTerm("variable inside a power")
            try:
                return LinearForm(math.pow(base.const, exponent.const))
            except (ValueError, OverflowError) as exc:
                raise MathError(f"invalid power: {exc}") from exc
        return base

    def parse_postfix(self) -> LinearForm:
        form = self.parse_atom()
        while self.peek().kind == "OP" and self.peek().text == "%":
            self.advance()
            form = form.scaled(0.01)
        return form

    def parse_atom(self) -> LinearForm:
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            value = float(tok.text)
            # implicit multiplication: "2x" or "3(…)" — hmm, only NUM NAME
            if self.peek().kind == "NAME" and self.peek().text not in ex.FUNCTIONS:
                name = self.advance().text
                return LinearForm(0.0, {name: value})
            return LinearForm(value)
        if tok.kind == "NAME":
            self.advance()
            if tok.text in ex.FUNCTIONS:
                if self.peek().kind != "LPAREN":
                    raise ParseError(f"expected '(' after {tok.text}", position=tok.pos)
                self.advance()
                arg = self.parse_sum()
                if self.peek().kind != "RPAREN":
                    raise ParseError("expected ')'", position=self.peek().pos)
                self.advance()
                if not arg.is_const:
                    raise NonlinearTerm(f"variable inside {tok.text}()")
                return LinearForm(ex.eval_ast(ex.Call(tok.text, ex.Num(arg.const))))
            return LinearForm(0.0, {tok.text: 1.0})
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_sum()
            if self.peek().kind != "RPAREN":
                raise ParseError("expected ')'", position=self.peek().pos)
            self.advance()
            return inner
        raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}", position=tok.pos)


def _multiply(left: LinearForm, right: LinearForm, pos: int) -> LinearForm:
    if left.is_const:
        return right.scaled(left.const)
    if right.is_const:
        return left.scaled(right.const)
    raise NonlinearTerm("product of two variable terms")


def _divide(left: LinearForm, right: LinearForm, pos: int) -> LinearForm:
    if not right.is_const:
        raise NonlinearTerm("division by a variable term")
    if right.const == 0:
        raise MathError("division by zero")
    return left.scaled(1.0 / right.const)


def parse_equation(text: str) -> tuple[LinearForm, float]:
    """Parse one equation into the linear form of (lhs - rhs).

    Also returns the constant part of the right-hand side, used to scale the
    residual tolerance.
    """
    if text.count("=") != 1:
        raise ParseError(f"equation must contain exactly one '=': {text!r}")
    lhs_text, rhs_text = text.split("=")
    if not lhs_text.strip() or not rhs_text.strip():
        raise ParseError(f"empty side of equation: {text!r}")
    lhs = _LinearParser(ex.tokenize(lhs_text)).parse()
    rhs = _LinearParser(ex.tokenize(rhs_text)).parse()
    return lhs.plus(rhs, -1.0), rhs.const


def solve_linear_system(equations: list[str]) -> ToolOutcome:
    """Solve a system of linear equations given as text.

    Returns the unique solution as a variable->value map. Raises
    Inconsistent / Underdetermined for rank-deficient systems, NonlinearTerm
    for nonlinear input, ParseError for malformed equations.
    """
    if not equations:
        raise ParseError("no equations given")
    parsed = [parse_equation(eq) for eq in equations]
    forms = [form for form, _ in parsed]

    variables: list[str] = []
    for form in forms:
        for name in form.coeffs:
            if name not in variables:
                variables.append(name)
    if not variables:
        raise ParseError("no variables found in equation system")
    if len(variables) > MAX_VARIABLES:
        raise ParseError(f"too many variables ({len(variables)} > {MAX_VARIABLES})")

    n = len(variables)
    rows = [[form.coeffs.get(v, 0.0) for v in variables] + [-form.const] for form in forms]
    solution_vec = _eliminate(rows, n)

    solution = {v: solution_vec[j] for j, v in enumerate(variables)}
    _check_residuals(parsed, solution)
    return outcome_from_solution(solution)


def _eliminate(rows: list[list[float]], n: int) -> list[float]:
    """Gaussian elimination with partial pivoting on the augmented matrix."""
    m = len(rows)
    scale = max((abs(x) for row in rows for x in row), default=0.0)
    tol = PIVOT_RTOL * max(1.0, scale)

    pivot_cols: list[int] = []
    r = 0
    for col in range(n):
        pivot = max(range(r, m), key=lambda i: abs(rows[i][col]), default=None)
        if pivot is None or abs(rows[pivot][col]) < tol:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(r + 1, m):
            if rows[i][col] == 0.0:
                continue
            factor = rows[i][col] / rows[r][col]
            for j in range(col, n + 1):
                rows[i][j] -= factor * rows[r][j]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break

    # rows below the last pivot must be all-zero including the constant
    for i in range(r, m):
        if abs(rows[i][n]) > tol:
            raise Inconsistent("equation system has no solution")
    if r < n:
        raise Underdetermined("equation system has infinitely many solutions")

    x = [0.0] * n
    for k in range(r - 1, -1, -1):
        col = pivot_cols[k]
        acc = rows[k][n]
        for j in range(col + 1, n):
            acc -= rows[k][j] * x[j]
        x[col] = acc / rows[k][col]
    return x


def _check_residuals(parsed: list[tuple[LinearForm, float]], solution: dict[str, float]) -> None:
    for form, rhs_const in parsed:
        residual = form.const + sum(c * solution[v] for v, c in form.coeffs.items())
        if abs(residual) > RESIDUAL_RTOL * (1.0 + abs(rhs_const)):
            raise MathError("solution failed residual check (ill-conditioned system)")
