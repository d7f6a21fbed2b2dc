"""Reduction of the minimal-surface equation by commuting translations, and an ODE integrator."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce as _fold

import numpy as np

from .errors import (
    DomainError, LeadingCoefficientVanishes, NonCommuting, NotTranslation, ReductionError,
    ResidualDependence,
)
from .expr import (
    ZERO, Const, Expr, SampleConfig, Status, Sym, add, clear_denominators, diff, draw_samples,
    evaluate, expand, is_zero, mul, substitute_many, to_text,
)
from .expr.normal import factor_powers, terms_of
from .geometry import VectorField, commutator
from .noether import JetSpace

__all__ = [
    "ReducedProblem", "OdeSolution", "Proportionality", "DomainExit",
    "reduce", "compare_up_to_factor", "integrate", "write_trace", "ode_symbols",
    "dust_ode_reference",
]

log = logging.getLogger(__name__)

S, SX, SXX = Sym("s"), Sym("s_x"), Sym("s_xx")


def ode_symbols():
    return S, SX, SXX


def dust_ode_reference() -> Expr:
    """The published reduced ODE of the dust universe, transcribed as text."""
    from .expr import parse
    return parse("3*s^(8/3)*s_xx - 8*s^(5/3)*s_x^2 - 6*s^3"
                 " - 3*lam*(s^2 + s^(2/3)*s_x^2)*sqrt(s^4 + s^(8/3)*s_x^2)")


@dataclass(frozen=True)
class ReducedProblem:
    """A PDE reduced to one independent variable.

    `ode` is in the symbols s, s_x, s_xx (and the surviving variable, named
    ``x`` after renaming); `raw` is the same equation before denominators
    are cleared.
    """

    variable: str
    eliminated: tuple
    ode: Expr
    raw: Expr
    provenance: tuple
    reduced_pde: Expr
    jets: JetSpace

    def text(self):
        return to_text(self.ode)


def _translation_target(X: VectorField, jets: JetSpace):
    nonzero = {k: v for k, v in X.components.items() if v != ZERO}
    for k, v in nonzero.items():
        if not isinstance(v, Const):
            raise NotTranslation(f"{X.label}: component {k} = {to_text(v)} is not constant")
        if k not in (jets.u, *jets.xs):
            raise NotTranslation(f"{X.label}: unknown coordinate {k!r}")
    if len(nonzero) != 1:
        raise NotTranslation(f"{X.label}: not a single coordinate translation")
    (k,) = nonzero
    if k == jets.u:
        raise NotTranslation(f"{X.label}: translates the dependent variable {k}")
    return k


def _as_field(sym_or_name, jets):
    if isinstance(sym_or_name, VectorField):
        return sym_or_name
    name = str(sym_or_name)
    return VectorField(f"d_{name}", {name: Const(1)})


def _zero_jets(jets: JetSpace, y: str):
    out = {jets.first(y).name: ZERO}
    for x in jets.xs:
        out[jets.second(x, y).name] = ZERO
    return out


def _normalize_coefficients(e, lead):
    # integer coefficients with gcd 1; the first term containing `lead` positive
    terms = terms_of(e)
    coefs = [factor_powers(t)[0] for t in terms]
    if not coefs:
        return e
    den = _fold(math.lcm, (c.denominator for c in coefs), 1)
    num = _fold(math.gcd, (abs(c.numerator) * (den // c.denominator) for c in coefs), 0) or 1
    scale = Fraction(den, num)
    for t, c in zip(terms, coefs):
        if lead in t.free_symbols:
            if c < 0:
                scale = -scale
            break
    return expand(mul(Const(scale), e))


def reduce(pde: Expr, jets: JetSpace, symmetries, cfg: SampleConfig | None = None) -> ReducedProblem:
    """Eliminate each translated coordinate in turn by zeroing its jets.

    `symmetries` are VectorFields (or coordinate names) that must be pure
    translations d_y and commute pairwise.
    """
    fields = [_as_field(s, jets) for s in symmetries]
    targets = [_translation_target(X, jets) for X in fields]
    coords = (jets.u, *jets.xs)
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            c = commutator(fields[i], fields[j], coords)
            if any(v != ZERO for v in c.components.values()):
                raise NonCommuting(f"[{fields[i].label}, {fields[j].label}] != 0")
    if len(set(targets)) != len(targets):
        raise NotTranslation("the same coordinate is translated twice")
    cfg = cfg or SampleConfig()
    cur = pde
    for y in targets:
        cur = substitute_many(cur, _zero_jets(jets, y))
        if y in cur.depends:
            chk = is_zero(diff(cur, y), cfg)
            if chk.status is not Status.ZERO:
                raise ResidualDependence(f"reduced equation still depends on {y}")
    left = [x for x in jets.xs if x not in targets]
    if len(left) != 1:
        raise ReductionError(f"{len(left)} independent variables remain; need exactly one")
    (x,) = left
    rename = {jets.u: S, jets.first(x).name: SX, jets.second(x, x).name: SXX}
    if x != "x":
        if "x" in cur.free_symbols:
            raise ReductionError("surviving variable cannot be renamed to x")
        rename[x] = Sym("x")
    raw = substitute_many(cur, rename)
    cleared = clear_denominators(raw, protect=frozenset({"s_x", "s_xx"}))
    ode = _normalize_coefficients(cleared, "s_xx")
    return ReducedProblem(x, tuple(targets), ode, raw, tuple(X.label for X in fields), cur, jets)


# ---------------------------------------------------------------------------
# proportionality


@dataclass(frozen=True)
class Proportionality:
    proportional: bool
    factor: float | None
    spread: float
    reason: str = ""

    @property
    def verdict(self):
        return "Proportional" if self.proportional else "NotProportional"


def compare_up_to_factor(e1: Expr, e2: Expr, cfg: SampleConfig | None = None, rel=1e-8,
                         tiny=1e-300) -> Proportionality:
    """Is e1 / e2 the same nonzero constant at every sample?"""
    cfg = cfg or SampleConfig()
    boxes = {"s": (0.5, 3.0), "s_x": (-1.0, 1.0), "s_xx": (-1.0, 1.0)}
    cfg = cfg.with_boxes({k: v for k, v in boxes.items() if k not in cfg.boxes})
    pts = draw_samples(e1.free_symbols | e2.free_symbols, cfg)
    a = np.broadcast_to(evaluate(e1, pts), (cfg.n,))
    b = np.broadcast_to(evaluate(e2, pts), (cfg.n,))
    if np.any((np.abs(a) <= tiny) & (np.abs(b) <= tiny)):
        return Proportionality(False, None, math.inf, "0/0 at a sample")
    if np.any(np.abs(b) <= tiny) or np.any(np.abs(a) <= tiny):
        return Proportionality(False, None, math.inf, "one side vanishes alone")
    r = a / b
    r0 = float(np.median(r))
    spread = float(np.max(np.abs(r - r0)) / abs(r0))
    ok = spread <= rel
    return Proportionality(ok, r0 if ok else None, spread, "" if ok else "ratio varies")


# ---------------------------------------------------------------------------
# integration

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
METHOD = "dopri5"
BLOWUP = 1e8
ORDER = 5


class DomainExit(ReductionError):
    """Integration left the domain; `solution` holds the partial trace."""

    def __init__(self, reason, solution=None):
        super().__init__(reason)
        self.reason = reason
        self.solution = solution


@dataclass(frozen=True)
class OdeSolution:
    x: np.ndarray
    s: np.ndarray
    sp: np.ndarray
    residual: np.ndarray
    lam: float
    meta: dict = field(default_factory=dict)
    status: str = "Completed"
    reason: str = ""

    @property
    def completed(self):
        return self.status == "Completed"

    def rows(self):
        return zip(self.x, self.s, self.sp, self.residual)


def _step(f, x, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(x + _C[i] * h, yi))
    k = np.array(ks)
    y5 = y + h * (_B5 @ k)
    err = h * ((_B5 - _B4) @ k)
    return y5, err, ks[6]


def _rhs(problem, lam):
    F = problem.ode
    a = diff(F, "s_xx")
    if "s_xx" in a.free_symbols:
        raise ReductionError("reduced ODE is not linear in s_xx")
    b = substitute_many(F, {"s_xx": ZERO})
    base = {"lam": float(lam)}

    def bind(x, y):
        d = dict(base)
        d.update(x=x, s=float(y[0]), s_x=float(y[1]))
        return d

    def coeffs(x, y):
        if y[0] <= 0:
            raise DomainError("s left the positive half-line")
        d = bind(x, y)
        return evaluate(a, d), evaluate(b, d)

    def f(x, y):
        av, bv = coeffs(x, y)
        if av == 0:
            raise LeadingCoefficientVanishes(f"leading coefficient vanishes at x = {x!r}")
        return np.array([y[1], -bv / av])

    def residual(x, y, spp):
        # scale-relative residual of the uncleared equation, independent of the solve above
        d = bind(x, y)
        d["s_xx"] = spp
        terms = terms_of(problem.raw)
        vals = [evaluate(t, d) for t in terms]
        return abs(sum(vals)) / (1.0 + max(abs(v) for v in vals))

    return f, coeffs, residual


def integrate(problem: ReducedProblem, x0: float, s0: float, sp0: float, lam: float = 0.0,
              span: float = 1.0, rtol: float = 1e-8, atol: float | None = None,
              h: float | None = None, max_steps: int = 200_000, strict: bool = False) -> OdeSolution:
    """Integrate the reduced ODE from x0 to x0 + span.

    Adaptive Dormand-Prince 5(4) by default; passing `h` uses that fixed
    step with no error control.  Leaving the domain (s <= 0, a negative
    radicand) stops the run with status "DomainExit" and the partial trace,
    or raises DomainExit when `strict`.
    """
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    atol = rtol if atol is None else atol
    f, coeffs, residual = _rhs(problem, lam)
    y = np.array([float(s0), float(sp0)])
    x = float(x0)
    x_end = x0 + span
    direction = 1.0 if span >= 0 else -1.0
    try:
        av, _ = coeffs(x, y)
    except DomainError as exc:
        raise DomainExit(f"initial point outside the domain: {exc}") from exc
    if abs(av) <= 1e-14:
        raise LeadingCoefficientVanishes(f"leading coefficient vanishes at x0 = {x0!r}")
    k1 = f(x, y)
    xs, ys, res = [x], [y.copy()], [residual(x, y, k1[1])]
    status, reason = "Completed", ""
    if h is None:
        step = direction * min(abs(span), 1e-2 * max(1.0, abs(span)))
        policy = "adaptive"
    else:
        step = direction * abs(h)
        policy = "fixed"
    n_acc = n_rej = 0
    for _ in range(max_steps):
        if direction * (x_end - x) <= 1e-14 * max(1.0, abs(x_end)):
            break
        if direction * (x + step - x_end) > 0:
            step = x_end - x
        try:
            y_new, err, _ = _step(f, x, y, step, k1)
            if not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > BLOWUP:
                raise DomainError("s or s' blew up")
            if y_new[0] <= 0:
                raise DomainError("s left the positive half-line")
            k_new = f(x + step, y_new)
            r_new = residual(x + step, y_new, k_new[1])
        except DomainError as exc:
            if policy == "adaptive" and abs(step) > 1e-12:
                step *= 0.25
                n_rej += 1
                continue
            status, reason = "DomainExit", str(exc)
            break
        if policy == "adaptive":
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            en = float(np.sqrt(np.mean((err / sc) ** 2)))
            if en > 1.0:
                step *= max(0.2, 0.9 * en ** (-1 / 5))
                n_rej += 1
                continue
            grow = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** (-1 / 5)))
        x += step
        y = y_new
        k1 = k_new
        n_acc += 1
        xs.append(x)
        ys.append(y.copy())
        res.append(r_new)
        if policy == "adaptive":
            step *= grow
    else:
        status, reason = "DomainExit", "step budget exhausted"
    Y = np.array(ys)
    meta = {"method": METHOD, "order": ORDER, "step_policy": policy, "rtol": rtol, "atol": atol,
            "accepted": n_acc, "rejected": n_rej}
    if policy == "fixed":
        meta["h"] = abs(h)
    sol = OdeSolution(np.array(xs), Y[:, 0], Y[:, 1], np.array(res), float(lam), meta, status, reason)
    if status != "Completed":
        log.warning("integration stopped at x = %g: %s", x, reason)
        if strict:
            raise DomainExit(reason, sol)
    return sol


def write_trace(sol: OdeSolution, path_or_file):
    """Header line then rows ``x s s' residual`` in '%.17g' (locale independent)."""
    lines = ["x s s' residual"]
    for row in sol.rows():
        lines.append(" ".join("%.17g" % float(v) for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    return text
