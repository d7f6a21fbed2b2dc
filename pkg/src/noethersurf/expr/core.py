"""Immutable expression trees with canonicalizing constructors.

Every public constructor (`add`, `mul`, `power`, `func`, ...) returns a tree
in canonical form: sums and products are flattened and argument-sorted,
constants are folded, like terms are collected and equal bases are merged.
Quotients are negative powers; there is no division node.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational

__all__ = [
    "Expr", "Const", "Sym", "Opaque", "Func", "Pow", "Mul", "Add",
    "FUNCTIONS", "ZERO", "ONE",
    "const", "sym", "opaque", "func", "power", "mul", "add", "neg", "sub",
    "as_expr", "diff", "substitute", "substitute_many", "canonicalize",
]

FUNCTIONS = ("sin", "cos", "tan", "cot", "exp", "log", "abs")


class Expr:
    __slots__ = ("_hash", "_key", "_free", "_deps")

    def _init(self, key):
        self._key = key
        self._hash = hash(key)
        self._free = None
        self._deps = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        from .textio import to_text
        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .textio import to_text
        return to_text(self)

    # arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    # structure --------------------------------------------------------
    @property
    def args(self):
        return ()

    @property
    def free_symbols(self):
        """Names that must be bound to evaluate this expression."""
        if self._free is None:
            out = set()
            for a in self.args:
                out |= a.free_symbols
            self._free = frozenset(out)
        return self._free

    @property
    def depends(self):
        """Coordinate names this expression may vary with under `diff`."""
        if self._deps is None:
            out = set()
            for a in self.args:
                out |= a.depends
            self._deps = frozenset(out)
        return self._deps

    @property
    def is_const(self):
        return isinstance(self, Const)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)
        self._init((0, self.value))

    @property
    def free_symbols(self):
        return frozenset()

    @property
    def depends(self):
        return frozenset()


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name
        self._init((1, name))

    @property
    def free_symbols(self):
        return frozenset((self.name,))

    @property
    def depends(self):
        return frozenset((self.name,))


class Opaque(Expr):
    """Unspecified function of one coordinate, e.g. ``nu(R)``.

    Each derivative order is an independent value when evaluating, bound
    under ``name`` followed by one prime per order.  A declared first
    derivative (``deriv``) makes the function an antiderivative instead.
    """

    __slots__ = ("name", "var", "order", "deriv")

    def __init__(self, name, var, order=0, deriv=None):
        self.name = name
        self.var = var
        self.order = order
        self.deriv = deriv
        self._init((2, name, order, var, deriv._key if deriv is not None else ()))

    @property
    def binding(self):
        return self.name + "'" * self.order

    @property
    def free_symbols(self):
        return frozenset((self.binding,))

    @property
    def depends(self):
        return frozenset((self.var,))


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        self.name = name
        self.arg = arg
        self._init((3, name, arg._key))

    @property
    def args(self):
        return (self.arg,)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        self.base = base
        self.exp = Fraction(exp)
        self._init((4, base._key, self.exp))

    @property
    def args(self):
        return (self.base,)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self._init((5, tuple(f._key for f in self.factors)))

    @property
    def args(self):
        return self.factors

    def split_coeff(self):
        first = self.factors[0]
        if isinstance(first, Const):
            rest = self.factors[1:]
            return first.value, rest[0] if len(rest) == 1 else Mul(rest)
        return Fraction(1), self


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._init((6, tuple(t._key for t in self.terms)))

    @property
    def args(self):
        return self.terms


ZERO = Const(0)
ONE = Const(1)


def _sort_key(e):
    return e._key


def as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Rational)):
        return Const(value)
    if isinstance(value, float):
        return Const(Fraction(value))
    if isinstance(value, str):
        from .textio import parse
        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def const(value):
    return Const(value)


def sym(name):
    return Sym(name)


def opaque(name, var, order=0, deriv=None):
    return Opaque(name, var, order, deriv)


def _exact_root(v, q):
    """Exact positive q-th root of a positive Fraction, or None."""
    out = []
    for n in (v.numerator, v.denominator):
        r = round(n ** (1.0 / q))
        for cand in (r - 1, r, r + 1):
            if cand > 0 and cand ** q == n:
                out.append(cand)
                break
        else:
            return None
    return Fraction(out[0], out[1])


def power(base, exponent):
    base = as_expr(base)
    if isinstance(exponent, Const):
        exponent = exponent.value
    elif isinstance(exponent, Expr):
        raise TypeError("exponent must be a rational constant")
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Const):
        v = base.value
        if v == 0:
            return ZERO if e > 0 else Pow(base, e)
        if v == 1:
            return ONE
        if e.denominator == 1:
            return Const(v ** e.numerator)
        if v > 0:
            r = _exact_root(v, e.denominator)
            if r is not None:
                return Const(r ** e.numerator)
        return Pow(base, e)
    if isinstance(base, Pow):
        if e.denominator == 1 or base.exp.denominator != 1:
            return power(base.base, base.exp * e)
        return Pow(base, e)
    if isinstance(base, Mul) and e.denominator == 1:
        return mul(*(power(f, e) for f in base.factors))
    if isinstance(base, Func) and base.name == "exp":
        return func("exp", mul(Const(e), base.arg))
    return Pow(base, e)


def func(name, arg):
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, Fraction(1, 2))
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if isinstance(arg, Const):
        v = arg.value
        if name == "abs":
            return Const(abs(v))
        if v == 0:
            if name in ("sin", "tan"):
                return ZERO
            if name in ("cos", "exp"):
                return ONE
        if name == "log" and v == 1:
            return ZERO
    return Func(name, arg)


def mul(*args):
    coef = Fraction(1)
    powers = {}
    exp_args = []
    stack = list(args)
    while stack:
        f = as_expr(stack.pop())
        if isinstance(f, Const):
            if f.value == 0:
                return ZERO
            coef *= f.value
        elif isinstance(f, Mul):
            stack.extend(f.factors)
        elif isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
        elif isinstance(f, Pow):
            powers[f.base] = powers.get(f.base, 0) + f.exp
        else:
            powers[f] = powers.get(f, 0) + 1
    factors = []
    extra = []
    for b, e in powers.items():
        if e == 0:
            continue
        p = power(b, e)
        if isinstance(p, Const):
            coef *= p.value
        elif isinstance(p, Mul):
            extra.append(p)
        elif isinstance(p, Func) and p.name == "exp":
            exp_args.append(p.arg)
        else:
            factors.append(p)
    if exp_args:
        ef = func("exp", add(*(_linear(a) for a in exp_args)))
        if isinstance(ef, Const):
            coef *= ef.value
        else:
            factors.append(ef)
    if extra:
        return mul(Const(coef), *factors, *extra)
    if coef == 0:
        return ZERO
    factors.sort(key=_sort_key)
    if not factors:
        return Const(coef)
    if coef == 1 and len(factors) == 1:
        return factors[0]
    if coef != 1:
        factors.insert(0, Const(coef))
    return Mul(factors)


def _linear(a):
    # c*(p + q) -> c*p + c*q, so merged exponentials collect like terms
    if isinstance(a, Add):
        return add(*(_linear(t) for t in a.terms))
    if isinstance(a, Mul) and len(a.factors) == 2 and isinstance(a.factors[0], Const) \
            and isinstance(a.factors[1], Add):
        c = a.factors[0]
        return add(*(mul(c, _linear(t)) for t in a.factors[1].terms))
    return a


def _split(term):
    if isinstance(term, Mul):
        return term.split_coeff()
    return Fraction(1), term


def add(*args):
    total = Fraction(0)
    terms = {}
    stack = list(args)
    while stack:
        t = as_expr(stack.pop())
        if isinstance(t, Const):
            total += t.value
        elif isinstance(t, Add):
            stack.extend(t.terms)
        else:
            c, rest = _split(t)
            terms[rest] = terms.get(rest, 0) + c
    out = []
    for rest, c in terms.items():
        if c == 0:
            continue
        out.append(rest if c == 1 else mul(Const(c), rest))
    out.sort(key=_sort_key)
    if total != 0:
        out.insert(0, Const(total))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(out)


def neg(e):
    return mul(Const(-1), e)


def sub(a, b):
    return add(a, neg(as_expr(b)))


# ---------------------------------------------------------------------------
# structural transforms


def rebuild(e, fn):
    """Rebuild `e` bottom-up through the canonical constructors.

    `fn` may return a replacement for a leaf (Sym/Opaque) or None to keep it.
    """
    memo = {}

    def go(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, (Sym, Opaque)):
            r = fn(x)
            out = x if r is None else r
        elif isinstance(x, Const):
            out = x
        elif isinstance(x, Func):
            out = func(x.name, go(x.arg))
        elif isinstance(x, Pow):
            out = power(go(x.base), x.exp)
        elif isinstance(x, Mul):
            out = mul(*(go(f) for f in x.factors))
        else:
            out = add(*(go(t) for t in x.terms))
        memo[x] = out
        return out

    return go(e)


def canonicalize(e):
    return rebuild(e, lambda leaf: None)


def substitute_many(e, mapping):
    """Simultaneously replace symbols (or opaque functions) by expressions.

    Replacing an opaque function ``a`` by an expression ``f(t)`` maps every
    derivative ``a'...'(t)`` to the matching derivative of ``f``.
    """
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    if not mapping:
        return e

    def leaf(x):
        if isinstance(x, Sym):
            return mapping.get(x.name)
        r = mapping.get(x.name)
        if r is None:
            return None
        for _ in range(x.order):
            r = diff(r, x.var)
        return r

    return rebuild(e, leaf)


def substitute(e, s, replacement):
    name = s.name if isinstance(s, (Sym, Opaque)) else s
    return substitute_many(e, {name: replacement})


# ---------------------------------------------------------------------------
# differentiation


def diff(e, s):
    """Exact partial derivative of `e` with respect to symbol `s`."""
    name = s.name if isinstance(s, Sym) else s
    return _diff(e, name)


@lru_cache(maxsize=500_000)
def _diff(e, s):
    if s not in e.depends:
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Opaque):
        if e.order == 0 and e.deriv is not None:
            return e.deriv
        return Opaque(e.name, e.var, e.order + 1)
    if isinstance(e, Add):
        return add(*(_diff(t, s) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        out = []
        for i, f in enumerate(fs):
            d = _diff(f, s)
            if d != ZERO:
                out.append(mul(*fs[:i], d, *fs[i + 1:]))
        return add(*out)
    if isinstance(e, Pow):
        return mul(Const(e.exp), power(e.base, e.exp - 1), _diff(e.base, s))
    a = e.arg
    da = _diff(a, s)
    n = e.name
    if n == "sin":
        outer = func("cos", a)
    elif n == "cos":
        outer = neg(func("sin", a))
    elif n == "tan":
        outer = power(func("cos", a), -2)
    elif n == "cot":
        outer = neg(power(func("sin", a), -2))
    elif n == "exp":
        outer = e
    elif n == "log":
        outer = power(a, -1)
    else:  # abs
        outer = mul(a, power(e, -1))
    return mul(outer, da)
