"""Recursive-descent parser and evaluator for closed-form chart expressions.

Grammar (whitespace insignificant)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? base ("^" integer)?
    base   := number | ident | "(" expr ")" | func "(" expr ")"
    func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"

Numbers are plain decimal literals (no exponent notation).  ``^`` binds
tighter than the unary minus in front of a base, so ``-x^2`` is ``-(x^2)``.
Identifiers must be declared coordinate names; anything else is rejected at
parse time with its position.  Division by zero and domain errors surface
at evaluation time, per point.

Parsed trees compile to nested closures over a coordinate list whose
entries may be floats or duals, so the same tree serves plain evaluation
and forward-mode differentiation.
"""

import re
from decimal import Decimal

from . import dual
from .errors import EvaluationError, ExprNameError, ExprSyntaxError

FUNC_NAMES = ("sin", "cos", "tan", "exp", "log", "sqrt")

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]\w*)|([()+\-*/^]))")


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", at, text)
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    return tokens


class Num:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def pretty(self):
        return format_number(self.v)

    def compile(self):
        v = self.v
        return lambda c: v


class Var:
    __slots__ = ("idx", "name")

    def __init__(self, idx, name):
        self.idx = idx
        self.name = name

    def pretty(self):
        return self.name

    def compile(self):
        i = self.idx
        return lambda c: c[i]


class Neg:
    __slots__ = ("child",)

    def __init__(self, child):
        self.child = child

    def pretty(self):
        return f"(-{self.child.pretty()})"

    def compile(self):
        f = self.child.compile()
        return lambda c: -f(c)


class Bin:
    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def pretty(self):
        return f"({self.left.pretty()} {self.op} {self.right.pretty()})"

    def compile(self):
        f = self.left.compile()
        g = self.right.compile()
        op = self.op
        if op == "+":
            return lambda c: f(c) + g(c)
        if op == "-":
            return lambda c: f(c) - g(c)
        if op == "*":
            return lambda c: f(c) * g(c)

        def div(c):
            d = g(c)
            if dual.value(d) == 0.0:
                raise EvaluationError("division by zero")
            return f(c) / d

        return div


class Pow:
    __slots__ = ("base", "k")

    def __init__(self, base, k):
        self.base = base
        self.k = k

    def pretty(self):
        return f"{self.base.pretty()}^{self.k}"

    def compile(self):
        f = self.base.compile()
        k = self.k
        return lambda c: dual.powi(f(c), k)


class Call:
    __slots__ = ("name", "child")

    def __init__(self, name, child):
        self.name = name
        self.child = child

    def pretty(self):
        return f"{self.name}({self.child.pretty()})"

    def compile(self):
        fn = dual.FUNCTIONS[self.name]
        f = self.child.compile()
        name = self.name

        def call(c):
            x = f(c)
            v = dual.value(x)
            if name == "log" and v <= 0.0:
                raise EvaluationError(f"log of nonpositive value {v}")
            if name == "sqrt" and v < 0.0:
                raise EvaluationError(f"sqrt of negative value {v}")
            try:
                return fn(x)
            except (ValueError, ZeroDivisionError) as exc:
                raise EvaluationError(f"{name}: {exc}") from exc

        return call


def format_number(v):
    """Render a float as a grammar-conformant decimal that round-trips exactly."""
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(Decimal(repr(v)), "f")


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.tokens = tokenize(text)
        self.names = {name: i for i, name in enumerate(names)}
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, text, at = self.next()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}", at, self.text)

    def parse(self):
        node = self.expr()
        kind, text, at = self.peek()
        if kind is not None:
            raise ExprSyntaxError(f"unexpected {text!r}", at, self.text)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = Bin(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = Bin(text, node, self.factor())
            else:
                return node

    def factor(self):
        kind, text, _ = self.peek()
        negate = False
        if kind == "op" and text == "-":
            self.next()
            negate = True
        node = self.base()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            kind, text, at = self.next()
            if kind != "num" or "." in text:
                raise ExprSyntaxError("integer exponent required after '^'", at, self.text)
            node = Pow(node, int(text))
        if negate:
            node = Neg(node)
        return node

    def base(self):
        kind, text, at = self.next()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in FUNC_NAMES:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Call(text, inner)
            if text in self.names:
                return Var(self.names[text], text)
            raise ExprNameError(text, at, self.text)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExprSyntaxError(f"expected a number, name or '(' but found {text!r}", at, self.text)


def parse(text, coordinate_names):
    """Parse ``text`` against the given coordinate names; returns the tree root."""
    return _Parser(text, coordinate_names).parse()
