"""A tiny complex-valued expression language for coefficient entries.

Grammar (loosest binding first)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | 'i' | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'

Exponents must fold to a constant non-negative integer. Error messages carry
byte offsets into the UTF-8 encoded input.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

MAX_INPUT_BYTES = 64 * 1024
MAX_DEPTH = 100  # about five Python frames per level stays well inside the default stack
MAX_EXPONENT = 4096
DEFAULT_VARIABLES = frozenset({"x1", "x2", "x3", "r"})
FUNCTIONS = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "exp": cmath.exp,
    # +0.0 clears a negative zero so the cut follows the principal convention
    "sqrt": lambda z: cmath.sqrt(complex(z.real, z.imag + 0.0)),
    "abs": lambda z: complex(abs(z)),
}


class ExpressionError(ValueError):
    """Syntax or evaluation error; ``offset`` is a byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        super().__init__(message if offset is None else f"{message} at byte {offset}")


class EvaluationError(ExpressionError):
    pass


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Number, Imag, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    byte_at = [0]
    for ch in text:
        byte_at.append(byte_at[-1] + len(ch.encode("utf-8")))
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            skip = len(rest) - len(rest.lstrip())
            if pos + skip >= len(text):
                break
            raise ExpressionError(f"unexpected character {text[pos + skip]!r}", byte_at[pos + skip])
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), byte_at[m.start(kind)]))
        pos = m.end()
    toks.append(_Tok("end", "", byte_at[-1]))
    return toks


class _Parser:
    def __init__(self, text: str, variables: frozenset):
        self.toks = _tokenize(text)
        self.pos = 0
        self.variables = variables
        self.depth = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        tok = self.take()
        if tok.text != text:
            raise ExpressionError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.offset)

    def enter(self, tok: _Tok):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExpressionError("expression nested too deeply", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        self.enter(self.peek())
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.text == "-":
            self.take()
            self.enter(tok)
            node = Neg(self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        tok = self.peek()
        if tok.text != "^":
            return base
        self.take()
        self.enter(tok)
        exponent = self.unary()
        self.depth -= 1
        if free_variables(exponent):
            raise ExpressionError("non-integer exponent: exponent must be constant", tok.offset)
        try:
            value = evaluate(exponent, {})
        except ExpressionError as exc:
            raise ExpressionError(f"invalid exponent ({exc})", tok.offset) from None
        if value.imag != 0 or not math.isfinite(value.real) or value.real != int(value.real):
            raise ExpressionError("non-integer exponent", tok.offset)
        if value.real < 0:
            raise ExpressionError("non-integer exponent: exponent must be >= 0", tok.offset)
        if value.real > MAX_EXPONENT:
            raise ExpressionError(f"exponent larger than {MAX_EXPONENT}", tok.offset)
        return BinOp("^", base, exponent)

    def primary(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExpressionError("numeric literal out of range", tok.offset)
            return Number(value)
        if tok.kind == "id":
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "i":
                return Imag()
            if name == "pi":
                return Number(math.pi)
            if name in self.variables:
                return Var(name)
            raise ExpressionError(f"unknown identifier {name!r}", tok.offset)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected {tok.text or 'end of input'!r}", tok.offset)


def parse(text: str, variables: Iterable[str] = DEFAULT_VARIABLES) -> Node:
    if not isinstance(text, str):
        raise ExpressionError("expression must be a string")
    if len(text.encode("utf-8")) > MAX_INPUT_BYTES:
        raise ExpressionError("expression longer than 64 KiB")
    if not text.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(text, frozenset(variables)).parse()


def _children(node: Node) -> tuple:
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Call):
        return (node.arg,)
    return ()


def _postorder(node: Node):
    """Iterative post-order walk; long left-associative chains stay off the call stack."""
    stack = [(node, False)]
    while stack:
        n, done = stack.pop()
        if done:
            yield n
            continue
        stack.append((n, True))
        for child in reversed(_children(n)):
            stack.append((child, False))


def free_variables(node: Node) -> set[str]:
    return {n.name for n in _postorder(node) if isinstance(n, Var)}


def _binop(op: str, a: complex, b: complex) -> complex:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise EvaluationError("division by zero")
        return a / b
    n = int(b.real)
    result = 1 + 0j
    base = a
    while n:
        if n & 1:
            result *= base
        base *= base
        n >>= 1
    return result


def evaluate(node: Node, bindings: Mapping[str, complex]) -> complex:
    """Evaluate to a complex number; sqrt is the principal branch."""
    stack: list[complex] = []
    try:
        for n in _postorder(node):
            if isinstance(n, Number):
                stack.append(complex(n.value))
            elif isinstance(n, Imag):
                stack.append(1j)
            elif isinstance(n, Var):
                if n.name not in bindings:
                    raise EvaluationError(f"unbound variable {n.name!r}")
                stack.append(complex(bindings[n.name]))
            elif isinstance(n, Neg):
                stack.append(0j - stack.pop())  # 0j - z keeps +0.0 imaginary parts
            elif isinstance(n, BinOp):
                b = stack.pop()
                a = stack.pop()
                stack.append(_binop(n.op, a, b))
            else:
                stack.append(FUNCTIONS[n.func](stack.pop()))
    except ExpressionError:
        raise
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise EvaluationError(f"arithmetic error: {exc}") from None
    return stack[0]


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg) or (isinstance(node, Number) and math.copysign(1.0, node.value) < 0):
        return 3
    return 5


def to_text(node: Node) -> str:
    """Source text that parses back to a tree with the same value."""
    out: list[str] = []
    for n in _postorder(node):
        if isinstance(n, Number):
            s = repr(n.value) if _prec(n) == 5 else f"-{-n.value!r}"
        elif isinstance(n, Imag):
            s = "i"
        elif isinstance(n, Var):
            s = n.name
        elif isinstance(n, Neg):
            inner = out.pop()
            s = f"-{inner}" if _prec(n.operand) >= 3 else f"-({inner})"
        elif isinstance(n, BinOp):
            b = out.pop()
            a = out.pop()
            p = _PREC[n.op]
            if n.op == "^":
                a = a if _prec(n.left) == 5 else f"({a})"
                b = b if _prec(n.right) >= 3 else f"({b})"
            else:
                a = a if _prec(n.left) >= p else f"({a})"
                b = b if _prec(n.right) > p else f"({b})"
            s = f"{a}{n.op}{b}"
        else:
            s = f"{n.func}({out.pop()})"
        out.append(s)
    return out[0]


@dataclass(frozen=True)
class Expression:
    """Parsed expression together with its source text."""

    text: str
    ast: Node

    @classmethod
    def compile(cls, text, variables: Iterable[str] = DEFAULT_VARIABLES) -> "Expression":
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = repr(float(text))
        return cls(str(text), parse(str(text), variables))

    def __call__(self, **bindings) -> complex:
        return evaluate(self.ast, bindings)

    @property
    def is_constant(self) -> bool:
        return not free_variables(self.ast)
