"""Heavier normal forms: full expansion, trig rewriting, denominator clearing."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .core import (
    ONE, Add, Const, Func, Mul, Opaque, Pow, Sym,
    add, func, mul, power,
)

__all__ = [
    "expand", "trig_normalize", "pythagorean", "clear_denominators", "terms_of", "factor_powers",
]

MAX_EXPAND_POWER = 16


def terms_of(e):
    return e.terms if isinstance(e, Add) else (e,)


def factor_powers(term):
    """Split a product into (coefficient, {base: exponent})."""
    coef = Fraction(1)
    out = {}
    factors = term.factors if isinstance(term, Mul) else (term,)
    for f in factors:
        if isinstance(f, Const):
            coef *= f.value
        elif isinstance(f, Pow):
            out[f.base] = out.get(f.base, 0) + f.exp
        else:
            out[f] = out.get(f, 0) + 1
    return coef, out


def _distribute(factors):
    acc = [ONE]
    for f in factors:
        acc = [mul(a, t) for a in acc for t in terms_of(f)]
    return acc


def _has_sum_factor(t):
    if isinstance(t, Add):
        return True
    if isinstance(t, Pow):
        return isinstance(t.base, Add) and t.exp >= 1
    if isinstance(t, Mul):
        return any(_has_sum_factor(f) for f in t.factors)
    return False


@lru_cache(maxsize=200_000)
def expand(e):
    """Distribute products over sums and multiply out powers of sums.

    Fractional powers of sums keep only their fractional part unexpanded,
    e.g. ``(a+b)^(3/2) -> (a + b)*(a+b)^(1/2)`` fully distributed.
    """
    if isinstance(e, (Const, Sym, Opaque)):
        return e
    if isinstance(e, Func):
        return func(e.name, expand(e.arg))
    if isinstance(e, Add):
        return add(*(expand(t) for t in e.terms))
    if isinstance(e, Pow):
        b = expand(e.base)
        p = e.exp
        if isinstance(b, Add) and p >= 1:
            whole = int(p)
            if whole > MAX_EXPAND_POWER:
                return power(b, p)
            parts = [b] * whole
            if p != whole:
                parts.append(power(b, p - whole))
            return _finish(_distribute(parts))
        return power(b, p)
    return _finish(_distribute([expand(f) for f in e.factors]))


def _finish(products):
    out = []
    for t in products:
        out.append(expand(t) if _has_sum_factor(t) else t)
    return add(*out)


def _multiple_angle(name, k, a):
    # sin(k a), cos(k a) by repeated angle addition
    s, c = func("sin", a), func("cos", a)
    sk, ck = s, c
    for _ in range(k - 1):
        sk, ck = add(mul(sk, c), mul(ck, s)), add(mul(ck, c), mul(-1, sk, s))
    return sk if name == "sin" else ck


@lru_cache(maxsize=50_000)
def trig_normalize(e):
    """Rewrite tan/cot as sin/cos quotients and expand small integer multiple angles."""
    if isinstance(e, (Const, Sym, Opaque)):
        return e
    if isinstance(e, Add):
        return add(*(trig_normalize(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(trig_normalize(f) for f in e.factors))
    if isinstance(e, Pow):
        return power(trig_normalize(e.base), e.exp)
    a = trig_normalize(e.arg)
    if e.name == "tan":
        return mul(func("sin", a), power(func("cos", a), -1))
    if e.name == "cot":
        return mul(func("cos", a), power(func("sin", a), -1))
    if e.name in ("sin", "cos") and isinstance(a, Mul) and len(a.factors) == 2:
        k, rest = a.factors
        if isinstance(k, Const) and k.value.denominator == 1 and 2 <= k.value <= 6:
            return _multiple_angle(e.name, int(k.value), rest)
    return func(e.name, a)


def _sin_squares(e):
    if isinstance(e, (Const, Sym, Opaque)):
        return e
    if isinstance(e, Add):
        return add(*(_sin_squares(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(_sin_squares(f) for f in e.factors))
    if isinstance(e, Pow):
        b = _sin_squares(e.base)
        p = e.exp
        if isinstance(b, Func) and b.name == "sin" and p.denominator == 1 and p >= 2:
            k = int(p)
            rest = power(b, k % 2)
            one_minus = add(ONE, mul(-1, power(func("cos", b.arg), 2)))
            return mul(rest, power(one_minus, k // 2))
        return power(b, p)
    return func(e.name, _sin_squares(e.arg))


def pythagorean(e):
    """Expanded form with every sin(a)^2 rewritten as 1 - cos(a)^2.

    Polynomials in sin(a), cos(a) that vanish by sin^2 + cos^2 = 1 collapse
    to 0 under this rewrite.
    """
    return expand(_sin_squares(expand(trig_normalize(e))))


def clear_denominators(e, protect=frozenset(), max_rounds=30):
    """Primitive numerator of ``e = 0``.

    Repeatedly expands, then multiplies every term by ``base^(-m)`` where
    ``m`` is the smallest exponent of that base across all terms.  Negative
    ``m`` (a denominator) is cleared in full; for positive ``m`` only the
    whole part is cancelled, so ``s^(2/3)`` common to every term is kept.  Bases involving a name
    in `protect` (the unknowns of an equation) are only ever multiplied in,
    never divided out.  Numeric coefficients are left alone.
    """
    cur = expand(e)
    for _ in range(max_rounds):
        terms = terms_of(cur)
        table = [factor_powers(t)[1] for t in terms]
        bases = {}
        for d in table:
            for b in d:
                bases.setdefault(b, None)
        shift = []
        for b in sorted(bases, key=lambda x: x._key):
            m = min(d.get(b, 0) for d in table)
            if m > 0:
                # cancel only whole powers; a common fractional power stays
                m = Fraction(int(m))
                if m == 0 or (b.free_symbols & protect):
                    continue
            if m == 0:
                continue
            shift.append(power(b, -m))
        if not shift:
            return cur
        cur = expand(add(*(mul(t, *shift) for t in terms)))
    return cur
