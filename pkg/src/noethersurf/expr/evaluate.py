"""IEEE double evaluation of expression trees, scalar or vectorized over numpy arrays."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..errors import DomainError, UnboundSymbol
from .core import Add, Const, Func, Mul, Opaque, Pow, Sym

__all__ = ["evaluate", "validate_bindings"]

_HALF = Fraction(1, 2)


def validate_bindings(bindings):
    for k, v in bindings.items():
        arr = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"binding {k!r} is not finite")


def _pow(b, e):
    if e.denominator == 1:
        n = e.numerator
        if n < 0 and np.any(b == 0):
            raise DomainError("zero raised to a negative power")
        if n == 2:
            return b * b
        return np.power(b, float(n)) if n < 0 else b ** n
    if np.any(b < 0):
        raise DomainError("fractional power of a negative number")
    if e < 0 and np.any(b == 0):
        raise DomainError("zero raised to a negative power")
    if e == _HALF:
        return np.sqrt(b)
    return np.power(b, float(e))


def _func(name, a):
    if name == "sin":
        return np.sin(a)
    if name == "cos":
        return np.cos(a)
    if name == "tan":
        c = np.cos(a)
        if np.any(c == 0):
            raise DomainError("tan at a pole")
        return np.sin(a) / c
    if name == "cot":
        s = np.sin(a)
        if np.any(s == 0):
            raise DomainError("cot at a pole")
        return np.cos(a) / s
    if name == "exp":
        return np.exp(a)
    if name == "log":
        if np.any(a <= 0):
            raise DomainError("log of a non-positive number")
        return np.log(a)
    return np.abs(a)


def evaluate(e, bindings, memo=None):
    """Evaluate `e` with symbol values from `bindings`.

    Values may be floats or equal-length numpy arrays (one entry per sample);
    the result has the broadcast shape.  Raises UnboundSymbol or DomainError.
    Passing the same `memo` dict to several calls shares common subtrees.
    """
    if memo is None:
        memo = {}

    def go(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Const):
            out = float(x.value)
        elif isinstance(x, Sym):
            try:
                out = bindings[x.name]
            except KeyError:
                raise UnboundSymbol(x.name) from None
        elif isinstance(x, Opaque):
            try:
                out = bindings[x.binding]
            except KeyError:
                raise UnboundSymbol(x.binding) from None
        elif isinstance(x, Add):
            out = go(x.terms[0])
            for t in x.terms[1:]:
                out = out + go(t)
        elif isinstance(x, Mul):
            out = go(x.factors[0])
            for f in x.factors[1:]:
                out = out * go(f)
        elif isinstance(x, Pow):
            out = _pow(np.asarray(go(x.base), dtype=float), x.exp)
        else:
            out = _func(x.name, np.asarray(go(x.arg), dtype=float))
        memo[x] = out
        return out

    with np.errstate(all="ignore"):
        out = go(e)
    arr = np.asarray(out, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite value")
    if arr.ndim == 0:
        return float(arr)
    return arr

