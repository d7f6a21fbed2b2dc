"""Minimal symbolic expression engine."""
from .core import (
    FUNCTIONS, ONE, ZERO, Add, Const, Expr, Func, Mul, Opaque, Pow, Sym,
    add, as_expr, canonicalize, const, diff, func, mul, neg, opaque, power,
    sub, substitute, substitute_many, sym,
)
from .evaluate import evaluate
from .integrate import antiderivative
from .normal import clear_denominators, expand, pythagorean, trig_normalize
from .textio import parse, to_text
from .zero import DEFAULT_SEED, SampleConfig, Status, ZeroResult, combine, draw_samples, is_zero

__all__ = [
    "FUNCTIONS", "ONE", "ZERO", "Add", "Const", "Expr", "Func", "Mul", "Opaque", "Pow", "Sym",
    "add", "as_expr", "canonicalize", "const", "diff", "func", "mul", "neg", "opaque",
    "power", "sub", "substitute", "substitute_many", "sym",
    "evaluate", "antiderivative", "clear_denominators", "expand", "pythagorean", "trig_normalize",
    "parse", "to_text",
    "DEFAULT_SEED", "SampleConfig", "Status", "ZeroResult", "combine", "draw_samples", "is_zero",
]
