"""
The right hand side grammar accepted by ``solve --rhs``:

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | "x" | "y" digits | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "exp"

``^`` is right associative and binds tighter than unary minus, so -y1^2 is
-(y1^2). Expressions are compiled to nested closures; nothing is evaluated
through ``eval``.
"""
import math
import re
from typing import Callable, List, NamedTuple, Optional

from pantograph.errors import ExpressionError

Node = Callable[[float, tuple], float]

FUNCTIONS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)
_DELAYED = re.compile(r"y(\d+)")


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(source: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(source):
        if source[position:].isspace():
            break
        match = _TOKEN.match(source, position)
        if match is None:
            offset = len(source[position:]) - len(source[position:].lstrip())
            raise ExpressionError(f"unexpected character {source[position + offset]!r}", position + offset)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, n_delays: Optional[int]):
        self.tokens = tokenize(source)
        self.index = 0
        self.n_delays = n_delays
        self.highest_argument = -1
        self.uses_x = False

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def take(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, text: str):
        token = self.take()
        if token.text != text:
            found = repr(token.text) if token.kind != "end" else "end of input"
            raise ExpressionError(f"expected {text!r}, found {found}", token.position)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise ExpressionError(f"unexpected {self.current.text!r}", self.current.position)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-"):
            op = self.take().text
            node = _binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.text in ("*", "/"):
            op = self.take().text
            node = _binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.text == "-":
            self.take()
            operand = self.unary()
            return lambda x, ys: -operand(x, ys)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.text == "^":
            self.take()
            return _binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        token = self.take()
        if token.kind == "number":
            value = float(token.text)
            return lambda x, ys: value
        if token.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "name":
            return self.name(token)
        found = repr(token.text) if token.kind != "end" else "end of input"
        raise ExpressionError(f"expected a number, symbol or '(', found {found}", token.position)

    def name(self, token: Token) -> Node:
        if token.text == "x":
            self.uses_x = True
            return lambda x, ys: x
        if token.text in FUNCTIONS:
            function = FUNCTIONS[token.text]
            self.expect("(")
            argument = self.expr()
            self.expect(")")
            return lambda x, ys: function(argument(x, ys))
        delayed = _DELAYED.fullmatch(token.text)
        if delayed is None:
            raise ExpressionError(f"unknown symbol {token.text!r}", token.position)
        i = int(delayed.group(1))
        if self.n_delays is not None and i > self.n_delays:
            raise ExpressionError(
                f"{token.text} refers to a delay that does not exist (n = {self.n_delays})",
                token.position,
            )
        self.highest_argument = max(self.highest_argument, i)
        return lambda x, ys: ys[i]


def _binary(op: str, left: Node, right: Node) -> Node:
    if op == "+":
        return lambda x, ys: left(x, ys) + right(x, ys)
    if op == "-":
        return lambda x, ys: left(x, ys) - right(x, ys)
    if op == "*":
        return lambda x, ys: left(x, ys) * right(x, ys)
    if op == "/":
        return lambda x, ys: left(x, ys) / right(x, ys)
    return lambda x, ys: left(x, ys) ** right(x, ys)


class Expression:
    """compiled f(x, y0, ..., yn); arithmetic faults evaluate to nan"""

    def __init__(self, source: str, root: Node, highest_argument: int, uses_x: bool):
        self.source = source
        self._root = root
        self.highest_argument = highest_argument
        self.uses_x = uses_x

    def __call__(self, x: float, *ys: float) -> float:
        if len(ys) <= self.highest_argument:
            raise ValueError(f"{self.source!r} needs y0..y{self.highest_argument}, got {len(ys)} values")
        try:
            value = self._root(x, ys)
        except (ZeroDivisionError, OverflowError, ValueError):
            return math.nan
        if isinstance(value, complex):
            # negative base with a fractional exponent
            return math.nan
        return float(value)

    def __repr__(self):
        return f"Expression({self.source!r})"


def parse_expression(source: str, n_delays: Optional[int] = None) -> Expression:
    """
    Compiles ``source``; with ``n_delays`` given, symbols beyond y{n_delays} are
    rejected.

    >>> parse_expression("y0 - 2*y1^2")(0.0, 3.0, 1.0)
    1.0

    :raises ExpressionError: carrying the character position of the fault
    """
    parser = _Parser(source, n_delays)
    root = parser.parse()
    return Expression(source, root, parser.highest_argument, parser.uses_x)
