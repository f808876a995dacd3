"""Arithmetic expression calculator.

Grammar (precedence loosest to tightest):

    sum      := product (('+' | '-') product)*
    product  := unary (('*' | '/' | '%'[binary]) unary)*
    unary    := '-' unary | power
    power    := postfix ('^' unary)?          # right-associative
    postfix  := atom ('%'[postfix])*
    atom     := NUMBER | NAME '(' sum ')' | '(' sum ')'

'^' is right-associative and binds tighter than unary minus, so "-2^2" is -4.
'%' is a postfix percent (divide by 100) unless the next token starts an
operand (number, name, or '('), in which case it is binary modulo (fmod).
Functions: sqrt, abs, ln, exp, log10. Numbers accept scientific notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import MathError, ParseError
from .render import ToolOutcome, outcome_from_number

FUNCTIONS = ("sqrt", "abs", "ln", "exp", "log10")

Node = Union["Num", "Bin", "Neg", "Percent", "Call"]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^ %
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg:
    operand: Node


@dataclass(frozen=True)
class Percent:
    operand: Node


@dataclass(frozen=True)
class Call:
    func: str
    arg: Node


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, LPAREN, RPAREN, END
    text: str
    pos: int


_OP_CHARS = set("+-*/^%")


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            start = i
            while i < n and src[i].isdigit():
                i += 1
            if i < n and src[i] == ".":
                i += 1
                while i < n and src[i].isdigit():
                    i += 1
            # exponent suffix: digits 'e'/'E' [sign] digits
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            tokens.append(Token("NUM", src[start:i], start))
            continue
        if ch.isalpha():
            start = i
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(Token("NAME", src[start:i], start))
            continue
        if ch in _OP_CHARS:
            tokens.append(Token("OP", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(Token("LPAREN", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(Token("RPAREN", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", position=i)
    tokens.append(Token("END", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text or 'end of input'!r}", position=tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.parse_sum()
        tail = self.peek()
        if tail.kind != "END":
            raise ParseError(f"unexpected trailing input {tail.text!r}", position=tail.pos)
        return node

    def parse_sum(self) -> Node:
        node = self.parse_product()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.parse_product())
        return node

    def parse_product(self) -> Node:
        node = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text in "*/":
                self.advance()
                node = Bin(tok.text, node, self.parse_unary())
            elif tok.kind == "OP" and tok.text == "%" and self._percent_is_binary():
                self.advance()
                node = Bin("%", node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> Node:
        if self.peek().kind == "OP" and self.peek().text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_postfix()
        if self.peek().kind == "OP" and self.peek().text == "^":
            self.advance()
            # exponent is parsed as unary so "2^-3" works and "2^3^2" nests right
            return Bin("^", base, self.parse_unary())
        return base

    def parse_postfix(self) -> Node:
        node = self.parse_atom()
        while self.peek().kind == "OP" and self.peek().text == "%" and not self._percent_is_binary():
            self.advance()
            node = Percent(node)
        return node

    def _percent_is_binary(self) -> bool:
        # '%' at self.i; binary modulo when the next token can start an operand.
        nxt = self.peek(1)
        return nxt.kind in ("NUM", "NAME", "LPAREN")

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "NAME":
            if tok.text not in FUNCTIONS:
                raise ParseError(f"unknown function or variable {tok.text!r}", position=tok.pos)
            self.advance()
            self.expect("LPAREN")
            arg = self.parse_sum()
            self.expect("RPAREN")
            return Call(tok.text, arg)
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_sum()
            self.expect("RPAREN")
            return inner
        raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}", position=tok.pos)


def parse_expression(src: str) -> Node:
    if not src or not src.strip():
        raise ParseError("empty expression", position=0)
    return _Parser(tokenize(src)).parse()


def _finite(value: float, context: str) -> float:
    if not math.isfinite(value):
        raise MathError(f"non-finite result in {context}")
    return value


def eval_ast(node: Node) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        return -eval_ast(node.operand)
    if isinstance(node, Percent):
        return _finite(eval_ast(node.operand) / 100.0, "percent")
    if isinstance(node, Bin):
        left = eval_ast(node.left)
        right = eval_ast(node.right)
        if node.op == "+":
            return _finite(left + right, "addition")
        if node.op == "-":
            return _finite(left - right, "subtraction")
        if node.op == "*":
            return _finite(left * right, "multiplication")
        if node.op == "/":
            if right == 0:
                raise MathError("division by zero")
            return _finite(left / right, "division")
        if node.op == "%":
            if right == 0:
                raise MathError("modulo by zero")
            return _finite(math.fmod(left, right), "modulo")
        if node.op == "^":
            try:
                return _finite(math.pow(left, right), "power")
            except (ValueError, OverflowError) as exc:
                raise MathError(f"invalid power: {exc}") from exc
        raise MathError(f"unknown operator {node.op!r}")
    if isinstance(node, Call):
        arg = eval_ast(node.arg)
        if node.func == "sqrt":
            if arg < 0:
                raise MathError("sqrt of negative number")
            return math.sqrt(arg)
        if node.func == "abs":
            return abs(arg)
        if node.func == "ln":
            if arg <= 0:
                raise MathError("ln of non-positive number")
            return math.log(arg)
        if node.func == "log10":
            if arg <= 0:
                raise MathError("log10 of non-positive number")
            return math.log10(arg)
        if node.func == "exp":
            try:
                return _finite(math.exp(arg), "exp")
            except OverflowError as exc:
                raise MathError("exp overflow") from exc
        raise MathError(f"unknown function {node.func!r}")
    raise TypeError(f"not an expression node: {node!r}")


def to_text(node: Node) -> str:
    """Canonical, fully parenthesized rendering; re-parses to an identical AST."""
    if isinstance(node, Num):
        return repr(node.value) if node.value != int(node.value) else str(int(node.value))
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Percent):
        return f"({to_text(node.operand)}%)"
    if isinstance(node, Bin):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def eval_expression(src: str) -> ToolOutcome:
    """Parse and evaluate an arithmetic expression.

    Raises ParseError for malformed syntax and MathError for arithmetic
    failures (division by zero, domain errors, overflow to non-finite).
    """
    value = eval_ast(parse_expression(src))
    return outcome_from_number(_finite(value, "expression"))
