"""Parser and evaluator for quaternion-valued functions of time.

The grammar is deliberately small:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' uint)?
    atom   := number | 'i' | 'j' | 'k' | variable | '(' expr ')'
            | ('exp'|'cos'|'sin') '(' expr ')' | '-' atom

Multiplication is left-associative and preserves operand order (quaternions
do not commute); division x/y means x * y^-1.  There is no implicit
multiplication.  `cos`/`sin` accept real arguments only; `exp` is the full
quaternion exponential.  The default variable is `t`; callers may allow
extra symbols (the CLI sweep enables `p`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .quaternion import Quaternion, qexp

UNIT_NAMES = {"i": Quaternion(0, 1, 0, 0),
              "j": Quaternion(0, 0, 1, 0),
              "k": Quaternion(0, 0, 0, 1)}
FUNCTION_NAMES = ("exp", "cos", "sin")
# tolerance for deciding that a cos/sin argument is real
REAL_ARG_TOL = 1e-12


class ExprSyntaxError(ValueError):
    """Malformed source text; `offset` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    """Identifier outside the grammar and the allowed variable set."""


class EvalError(ArithmeticError):
    """Evaluation failed at a concrete time."""


class DomainError(EvalError):
    """cos/sin applied to a non-real quaternion argument."""


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Unit:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


TimeExpr = (Num, Unit, Var, Neg, BinOp, Pow, Call)


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if match.lastgroup != "ws":
            tokens.append((match.lastgroup, match.group(), match.start()))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol):
        kind, text, offset = self.peek()
        if kind != "op" or text != symbol:
            raise ExprSyntaxError(f"expected {symbol!r}", offset)
        return self.advance()

    def parse_expr(self):
        node = self.parse_term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.parse_factor())
            else:
                return node

    def parse_factor(self):
        node = self.parse_atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            kind, text, offset = self.advance()
            if kind != "number" or not re.fullmatch(r"\d+", text):
                raise ExprSyntaxError("exponent must be a nonnegative integer", offset)
            node = Pow(node, int(text))
        return node

    def parse_atom(self):
        kind, text, offset = self.advance()
        if kind == "number":
            return Num(float(text))
        if kind == "ident":
            if text in UNIT_NAMES:
                return Unit(text)
            if text in FUNCTION_NAMES:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in self.variables:
                return Var(text)
            raise UnknownIdentifier(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "op" and text == "-":
            return Neg(self.parse_atom())
        raise ExprSyntaxError(f"unexpected {text!r}" if text else "unexpected end of input",
                              offset)


def parse(src, variables=("t",)):
    """Parse source text into a TimeExpr AST."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(src), tuple(variables))
    node = parser.parse_expr()
    kind, text, offset = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected trailing {text!r}", offset)
    return node


# -- evaluation ---------------------------------------------------------------


def _real_argument(value, fn):
    if value.vec_norm() > REAL_ARG_TOL * max(1.0, abs(value)):
        raise DomainError(f"{fn} requires a real argument, got {value}")
    return value.q0


def evaluate(node, t, params=None):
    """Evaluate an AST at time t; `params` maps extra variable names to reals."""
    if isinstance(node, Num):
        return Quaternion.from_real(node.value)
    if isinstance(node, Unit):
        return UNIT_NAMES[node.name]
    if isinstance(node, Var):
        if node.name == "t":
            return Quaternion.from_real(t)
        value = (params or {}).get(node.name)
        if value is None:
            raise EvalError(f"no value bound for variable {node.name!r}")
        return Quaternion.from_real(value)
    if isinstance(node, Neg):
        return -evaluate(node.arg, t, params)
    if isinstance(node, BinOp):
        left = evaluate(node.left, t, params)
        right = evaluate(node.right, t, params)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right  # x/y = x * y^-1; zero divisor raises DivisionByZero
    if isinstance(node, Pow):
        base = evaluate(node.base, t, params)
        out = Quaternion(1.0)
        for _ in range(node.exponent):
            out = out * base
        return out
    if isinstance(node, Call):
        arg = evaluate(node.arg, t, params)
        if node.fn == "exp":
            return qexp(arg)
        if node.fn == "cos":
            return Quaternion.from_real(math.cos(_real_argument(arg, "cos")))
        return Quaternion.from_real(math.sin(_real_argument(arg, "sin")))
    raise TypeError(f"not a TimeExpr node: {node!r}")


# alias matching the operation name used elsewhere
eval_expr = evaluate


# -- rendering ----------------------------------------------------------------

_ADD_PREC, _MUL_PREC, _POW_PREC, _ATOM_PREC = 1, 2, 3, 4


def _node_prec(node):
    if isinstance(node, BinOp):
        return _ADD_PREC if node.op in "+-" else _MUL_PREC
    if isinstance(node, Pow):
        return _POW_PREC
    return _ATOM_PREC


def render(node, min_prec=_ADD_PREC):
    """Render an AST back to source text that reparses to an equivalent AST."""
    if isinstance(node, Num):
        text = repr(float(node.value))
        body = text[:-2] if text.endswith(".0") else text
    elif isinstance(node, (Unit, Var)):
        body = node.name
    elif isinstance(node, Call):
        body = f"{node.fn}({render(node.arg)})"
    elif isinstance(node, Neg):
        body = f"-{render(node.arg, _ATOM_PREC)}"
    elif isinstance(node, Pow):
        body = f"{render(node.base, _ATOM_PREC)}^{node.exponent}"
    elif isinstance(node, BinOp):
        prec = _node_prec(node)
        body = (f"{render(node.left, prec)} {node.op} "
                f"{render(node.right, prec + 1)}")
    else:
        raise TypeError(f"not a TimeExpr node: {node!r}")
    if _node_prec(node) < min_prec:
        return f"({body})"
    return body


def quaternion_literal(q):
    """AST for a constant quaternion, written in the expression grammar."""
    node = Num(float(q.q0))
    for value, unit in ((q.q1, "i"), (q.q2, "j"), (q.q3, "k")):
        term = BinOp("*", Num(abs(float(value))), Unit(unit))
        node = BinOp("-" if value < 0 else "+", node, term)
    return node


# -- matrix specifications ----------------------------------------------------


class MatrixSpec:
    """Square grid of TimeExpr entries defining A(t), optionally periodic."""

    def __init__(self, entries, period=None):
        self.entries = tuple(tuple(row) for row in entries)
        self.n = len(self.entries)
        for row in self.entries:
            if len(row) != self.n:
                raise ValueError("matrix specification must be square")
        if period is not None and not period > 0:
            raise ValueError("period must be positive")
        self.period = period

    @staticmethod
    def from_strings(rows, period=None, variables=("t",)):
        parsed = [[parse(src, variables) for src in row] for row in rows]
        return MatrixSpec(parsed, period)

    @staticmethod
    def from_qmatrix(A, period=None):
        """Constant specification wrapping the entries of a QMatrix."""
        entries = [[quaternion_literal(A[i, j]) for j in range(A.cols)]
                   for i in range(A.rows)]
        return MatrixSpec(entries, period)

    def evaluate(self, t, params=None):
        from .qmatrix import QMatrix
        return QMatrix.from_entries(
            [[evaluate(entry, t, params) for entry in row] for row in self.entries])

    def periodicity_residual(self, grid_points=64, params=None):
        """max over a grid of ||A(t) - A(t+T)|| in the entrywise sum norm."""
        if self.period is None:
            return 0.0
        worst = 0.0
        for t in np.linspace(0.0, self.period, grid_points, endpoint=False):
            diff = self.evaluate(t, params) - self.evaluate(t + self.period, params)
            worst = max(worst, diff.sum_norm())
        return worst
