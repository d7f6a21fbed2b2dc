"""Infix text format: ``^`` for powers, ``sin(x)`` calls, exact ``p/q`` rationals.

``parse(to_text(e)) == e`` for every canonical expression.  Opaque functions
must be declared to the parser (name -> (variable, declared derivative)).
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError
from .core import (
    FUNCTIONS, Add, Const, Expr, Func, Mul, Opaque, Pow, Sym,
    add, func, mul, neg, power,
)

__all__ = ["parse", "to_text"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text, line0):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + 1
            while col - 1 < len(text) and text[col - 1].isspace():
                col += 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", line0, col)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text, functions, line):
        self.toks = _tokenize(text, line)
        self.i = 0
        self.functions = functions or {}
        self.line = line

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok[2])

    def expect(self, value):
        t = self.take()
        if t[1] != value:
            self.fail(f"expected {value!r}, found {t[1] or 'end of input'!r}", t)

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs if op == "+" else neg(rhs))
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                e = mul(e, rhs)
            else:
                if rhs == Const(0):
                    self.fail("division by literal zero")
                e = mul(e, power(rhs, -1))
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            ex = self.unary()
            if not isinstance(ex, Const):
                self.fail("exponent must be a rational constant", tok)
            if isinstance(base, Const) and base.value == 0 and ex.value < 0:
                self.fail("zero raised to a negative power", tok)
            return power(base, ex.value)
        return base

    def atom(self):
        tok = self.take()
        kind, text, col = tok
        if kind == "num":
            return Const(Fraction(text))
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            bare = text.rstrip("'")
            primes = len(text) - len(bare)
            if self.peek()[1] == "(":
                return self.call(bare, primes, tok)
            if primes:
                self.fail(f"primes are only allowed on declared functions: {text!r}", tok)
            return Sym(text)
        self.fail(f"unexpected {text or 'end of input'!r}", tok)

    def call(self, name, primes, tok):
        self.take()
        if name in self.functions:
            var, deriv = self.functions[name]
            arg = self.take()
            if arg[1] != var:
                self.fail(f"{name} is declared as a function of {var!r}", arg)
            self.expect(")")
            e = Opaque(name, var, 0, deriv)
            if primes:
                from .core import diff
                for _ in range(primes):
                    e = diff(e, var)
            return e
        if primes:
            self.fail(f"primes are only allowed on declared functions: {name!r}", tok)
        if name not in FUNCTIONS and name != "sqrt":
            self.fail(f"unknown function {name!r}", tok)
        arg = self.expr()
        self.expect(")")
        return func(name, arg)


def parse(text, functions=None, line=1):
    """Parse infix text into a canonical Expr.

    Args:
        text: expression source.
        functions: declared opaque functions, ``{name: (var, deriv_or_None)}``.
        line: line number reported in ParseError.
    """
    return _Parser(text, functions, line).parse()


# ---------------------------------------------------------------------------
# printing


def _frac(v):
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _is_atom(e):
    return isinstance(e, (Sym, Opaque, Func)) or (
        isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1)


def _pow_text(e):
    b = to_text(e.base)
    if not _is_atom(e.base):
        b = f"({b})"
    x = e.exp
    if x.denominator == 1 and x > 0:
        return f"{b}^{x.numerator}"
    return f"{b}^({_frac(x)})"


def _factor_text(f):
    if isinstance(f, Add):
        return f"({to_text(f)})"
    return to_text(f)


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return _frac(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Opaque):
        return f"{e.name}{chr(39) * e.order}({e.var})"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        return _pow_text(e)
    if isinstance(e, Mul):
        coef, rest = e.split_coeff()
        factors = rest.factors if isinstance(rest, Mul) else (rest,)
        body = "*".join(_factor_text(f) for f in factors)
        if coef == 1:
            return body
        if coef == -1:
            return "-" + body
        return f"{_frac(coef)}*{body}"
    parts = []
    for i, t in enumerate(e.terms):
        s = to_text(t)
        if i == 0:
            parts.append(s)
        elif s.startswith("-"):
            parts.append(" - " + s[1:])
        else:
            parts.append(" + " + s)
    return "".join(parts)
