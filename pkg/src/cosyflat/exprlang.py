"""A small arithmetic expression language evaluated on jets.

Grammar (whitespace insensitive, ASCII only)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' ['-'] number)?
    base   := number | var | func '(' expr ')' | '(' expr ')'
    var    := 'x' | 'y' | 'z'
    func   := 'exp' | 'ln' | 'sqrt' | 'sin' | 'cos'

``^`` binds tighter than unary minus (``-z^2`` is ``-(z^2)``) and its
exponent must be a numeric literal.  There is no implicit multiplication:
``2x`` is rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from . import jets
from .errors import DomainError, ParseError
from .jets import Jet3

GRAMMAR = __doc__.split("::", 1)[1].split("``^``", 1)[0].rstrip()

FUNCTIONS = ("exp", "ln", "sqrt", "sin", "cos")
VARIABLES = ("x", "y", "z")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Const, Var, Unary, Binary, Call]

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | end
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _fail(self, expected: set[str]):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.offset, frozenset(expected))

    def _accept(self, *ops: str) -> str | None:
        if self.tok.kind == "op" and self.tok.text in ops:
            return self._advance().text
        return None

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail({"+", "-", "*", "/", "^", "end"})
        return node

    def expr(self) -> Expr:
        node = self.term()
        while (op := self._accept("+", "-")) is not None:
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while (op := self._accept("*", "/")) is not None:
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self._accept("-"):
            return Unary("-", self.factor())
        node = self.base()
        if self._accept("^"):
            negative = self._accept("-") is not None
            if self.tok.kind != "number":
                self._fail({"number"})
            value = _number(self._advance())
            node = Binary("^", node, Const(-value if negative else value))
        return node

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            return Const(_number(self._advance()))
        if t.kind == "name":
            if t.text in VARIABLES:
                self._advance()
                return Var(t.text)
            if t.text in FUNCTIONS:
                self._advance()
                if not self._accept("("):
                    self._fail({"("})
                arg = self.expr()
                if not self._accept(")"):
                    self._fail({")"})
                return Call(t.text, arg)
            raise ParseError(f"unknown name {t.text!r}", t.offset, frozenset(VARIABLES + FUNCTIONS))
        if self._accept("("):
            node = self.expr()
            if not self._accept(")"):
                self._fail({")"})
            return node
        self._fail({"number", "variable", "function", "(", "-"})


def _number(tok: _Token) -> float:
    value = float(tok.text)
    if not math.isfinite(value):
        raise ParseError(f"numeric literal {tok.text!r} overflows", tok.offset, frozenset({"number"}))
    return value


def parse_expr(src: str) -> Expr:
    if not isinstance(src, str) or not src.strip():
        raise ParseError("empty expression", 0, frozenset({"number", "variable", "function", "(", "-"}))
    try:
        src.encode("ascii")
    except UnicodeEncodeError as exc:
        raise ParseError("non-ASCII character", len(src[: exc.start].encode()), frozenset()) from None
    return _Parser(src).parse()


def to_source(node: Expr) -> str:
    """Fully parenthesized source text that parses back to an equal tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if node.op == "^":
        return f"({to_source(node.left)} ^ {node.right.value!r})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def variables(node: Expr) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, Unary):
        return variables(node.operand)
    if isinstance(node, Call):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


def _float_call(func: str, v: float) -> float:
    if func in ("ln", "sqrt") and v <= 0:
        raise DomainError(f"{func} of non-positive value {v!r}")
    return {"exp": math.exp, "ln": math.log, "sqrt": math.sqrt, "sin": math.sin, "cos": math.cos}[func](v)


def evaluate(node: Expr, x, y, z):
    """Evaluate on jets or on plain floats (the arguments decide)."""
    env = {"x": x, "y": y, "z": z}
    use_jets = any(isinstance(v, Jet3) for v in env.values())

    def ev(n):
        if isinstance(n, Const):
            return n.value
        if isinstance(n, Var):
            return env[n.name]
        if isinstance(n, Unary):
            return -ev(n.operand)
        if isinstance(n, Call):
            arg = ev(n.arg)
            if isinstance(arg, Jet3):
                return jets.jet_elementary(n.func, arg)
            return _float_call(n.func, arg)
        left = ev(n.left)
        if n.op == "^":
            k = n.right.value
            if isinstance(left, Jet3):
                return jets.pow_const(left, k)
            if left <= 0 and not float(k).is_integer():
                raise DomainError(f"non-integer power {k} of non-positive value {left!r}")
            if left == 0 and k < 0:
                raise DomainError("negative power of zero")
            return left**k
        right = ev(n.right)
        if n.op == "+":
            return left + right
        if n.op == "-":
            return left - right
        if n.op == "*":
            return left * right
        if isinstance(right, Jet3):
            return left / right
        if right == 0:
            raise DomainError("division by zero")
        return left / right

    result = ev(node)
    if use_jets and not isinstance(result, Jet3):
        result = Jet3.constant(result)
    return result


def eval_expr(ast: Expr, point) -> Jet3:
    x, y, z = jets.coordinate_jets(point)
    return evaluate(ast, x, y, z)
