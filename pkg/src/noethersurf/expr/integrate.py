"""Pattern-table antidifferentiation.

Covers sums of ``c * x^n * sin(x)^a * cos(x)^b`` (a, b integers, n a
non-negative integer whenever a trig factor is present), ``x^n * exp(k x)``,
and plain powers of ``x``.  Anything else raises IntegrationPatternMiss.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from ..errors import IntegrationPatternMiss
from .core import (
    Const, Func, Mul, Pow, Sym,
    add, func, mul, power,
)
from .normal import expand, terms_of, trig_normalize

__all__ = ["antiderivative"]


def antiderivative(e, var):
    """An antiderivative of `e` in `var` (integration constant zero)."""
    name = var.name if isinstance(var, Sym) else var
    e = expand(trig_normalize(e))
    return add(*(_term(t, name) for t in terms_of(e)))


def _linear_coeff(arg, x):
    # arg == k*x + rest with rest free of x; returns (k, rest)
    k = Fraction(0)
    rest = []
    for t in terms_of(arg):
        if x not in t.depends:
            rest.append(t)
            continue
        if t == Sym(x):
            k += 1
        elif isinstance(t, Mul) and len(t.factors) == 2 and isinstance(t.factors[0], Const) \
                and t.factors[1] == Sym(x):
            k += t.factors[0].value
        else:
            raise IntegrationPatternMiss(f"non-linear exponent in {x}")
    return k, add(*rest)


def _term(t, x):
    if x not in t.depends:
        return mul(t, Sym(x))
    factors = t.factors if isinstance(t, Mul) else (t,)
    coef = []
    n = Fraction(0)
    a = b = 0
    k = Fraction(0)
    X = Sym(x)
    for f in factors:
        if x not in f.depends:
            coef.append(f)
            continue
        base, p = (f.base, f.exp) if isinstance(f, Pow) else (f, Fraction(1))
        if base == X:
            n += p
        elif isinstance(base, Func) and base.name in ("sin", "cos") and base.arg == X:
            if p.denominator != 1:
                raise IntegrationPatternMiss(f"fractional trig power in {x}")
            if base.name == "sin":
                a += int(p)
            else:
                b += int(p)
        elif isinstance(base, Func) and base.name == "exp" and p == 1:
            kk, rest = _linear_coeff(base.arg, x)
            k += kk
            coef.append(func("exp", rest))
        else:
            raise IntegrationPatternMiss(f"no table entry for factor {f} in {x}")
    return mul(*coef, _core(n, a, b, k, x))


def _core(n, a, b, k, x):
    X = Sym(x)
    if k != 0:
        if a or b or n.denominator != 1 or n < 0:
            raise IntegrationPatternMiss("exp times non-polynomial factor")
        n = int(n)
        ekx = func("exp", mul(Const(k), X))
        out = []
        for j in range(n + 1):
            c = Fraction((-1) ** j * factorial(n), factorial(n - j)) / k ** (j + 1)
            out.append(mul(Const(c), power(X, n - j)))
        return mul(ekx, add(*out))
    if a == 0 and b == 0:
        if n == -1:
            return func("log", X)
        return mul(Const(1 / (n + 1)), power(X, n + 1))
    if n == 0:
        return _trig(a, b, X)
    if n.denominator != 1 or n < 0:
        raise IntegrationPatternMiss("non-polynomial factor multiplying trig powers")
    n = int(n)
    F = _trig(a, b, X)
    # by parts: x^n F - n * int x^(n-1) F
    inner = antiderivative(mul(power(X, n - 1), F), x)
    return add(mul(power(X, n), F), mul(Const(-n), inner))


def _wsub(a_other, k, w, sign):
    # int w^a_other (1 - w^2)^k dw, times sign
    out = []
    for j in range(k + 1):
        e = a_other + 2 * j
        c = comb(k, j) * (-1) ** j * sign
        if e == -1:
            out.append(mul(Const(c), func("log", w)))
        else:
            out.append(mul(Const(Fraction(c, e + 1)), power(w, e + 1)))
    return add(*out)


def _trig(a, b, X):
    S, C = func("sin", X), func("cos", X)
    if a == 0 and b == 0:
        return X
    if b % 2 == 1 and b > 0:
        return _wsub(a, (b - 1) // 2, S, 1)
    if a % 2 == 1 and a > 0:
        return _wsub(b, (a - 1) // 2, C, -1)
    if a >= 2 and b >= 0:
        head = mul(Const(Fraction(-1, a + b)), power(S, a - 1), power(C, b + 1))
        return add(head, mul(Const(Fraction(a - 1, a + b)), _trig(a - 2, b, X)))
    if b >= 2 and a >= 0:
        head = mul(Const(Fraction(1, a + b)), power(S, a + 1), power(C, b - 1))
        return add(head, mul(Const(Fraction(b - 1, a + b)), _trig(a, b - 2, X)))
    if a < 0 and b >= 2:
        return add(_trig(a, b - 2, X), mul(Const(-1), _trig(a + 2, b - 2, X)))
    if b < 0 and a >= 2:
        return add(_trig(a - 2, b, X), mul(Const(-1), _trig(a - 2, b + 2, X)))
    if a <= -2 and b == 0 and a % 2 == 0:
        m = -a
        head = mul(Const(Fraction(-1, m - 1)), C, power(S, 1 - m))
        if m == 2:
            return head
        return add(head, mul(Const(Fraction(m - 2, m - 1)), _trig(a + 2, 0, X)))
    if b <= -2 and a == 0 and b % 2 == 0:
        m = -b
        head = mul(Const(Fraction(1, m - 1)), S, power(C, 1 - m))
        if m == 2:
            return head
        return add(head, mul(Const(Fraction(m - 2, m - 1)), _trig(0, b + 2, X)))
    if a < 0 and b < 0 and a % 2 == 0 and b % 2 == 0:
        return add(_trig(a + 2, b, X), _trig(a, b + 2, X))
    raise IntegrationPatternMiss(f"no table entry for sin^{a} cos^{b}")

