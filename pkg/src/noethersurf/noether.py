"""Noether point symmetries of the constant-volume minimal-surface Lagrangian.

The Lagrangian of a graph ``u = u(x)`` in a split metric is

    L = sqrt(|h| + |h| h^{ij} u_i u_j) + lam * V,    dV/du = sqrt|h|.

Jet variables are ordinary symbols named ``{u}_{x}`` (first order) and
``{u}_{x}_{y}`` (second order, coordinates in metric order).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import IntegrationPatternMiss, NoVolumePotential, ValidationError
from .expr import (
    ZERO, Const, Expr, Mul, Pow, SampleConfig, Status, Sym, ZeroResult, add,
    antiderivative, as_expr, diff, expand, is_zero, mul, neg, power, pythagorean,
    substitute, to_text,
)
from .geometry import (
    SplitMetric, VectorField, det_abs, inverse, is_killing, sym_covariant_derivative,
    christoffel,
)

__all__ = [
    "JetSpace", "MinSurfLagrangian", "GaugeVector", "NoetherVerdict", "NoetherCurrent",
    "build_lagrangian", "first_prolongation", "noether_condition_residual",
    "split_conditions", "construct_gauge", "check_theorem2", "check_corollary3",
    "noether_current", "euler_lagrange", "jet_config", "LAMBDA",
]

log = logging.getLogger(__name__)

LAMBDA = Sym("lam")
JET_BOX = (-1.0, 1.0)

NOETHER = "NoetherSymmetry"
NOT_NOETHER = "NotNoether"
CONSTRUCTED = "Constructed"
NO_SOLUTION = "NoSolution"


@dataclass(frozen=True)
class JetSpace:
    """Jet coordinates of a single dependent variable over independent `xs`."""

    u: str
    xs: tuple

    def __post_init__(self):
        for x in (self.u, *self.xs):
            if "_" in x:
                raise ValidationError("CoordinateName", f"{x!r} may not contain '_'")

    def first(self, x) -> Sym:
        return Sym(f"{self.u}_{x}")

    def second(self, x, y) -> Sym:
        i, j = sorted((self.xs.index(x), self.xs.index(y)))
        return Sym(f"{self.u}_{self.xs[i]}_{self.xs[j]}")

    @property
    def first_names(self):
        return tuple(f"{self.u}_{x}" for x in self.xs)

    @property
    def second_names(self):
        n = len(self.xs)
        return tuple(f"{self.u}_{self.xs[i]}_{self.xs[j]}" for i in range(n) for j in range(i, n))

    def total_derivative(self, f: Expr, x: str) -> Expr:
        """D_x f = f_,x + u_x f_,u + sum_j u_xj f_,u_j  (f of at most first order)."""
        if f.free_symbols & set(self.second_names):
            raise ValueError("total derivative of a second-order expression is not supported")
        out = [diff(f, x), mul(self.first(x), diff(f, self.u))]
        for y in self.xs:
            out.append(mul(self.second(x, y), diff(f, self.first(y).name)))
        return add(*out)


def jet_config(m: SplitMetric, positive=(), base: SampleConfig | None = None) -> SampleConfig:
    """Sampling plan over the metric box plus jet variables in [-1, 1].

    Square-root radicands go in `positive`; if one turns negative the jet box
    is halved and redrawn.
    """
    cfg = m.sample_config(base)
    jets = JetSpace(m.u, m.xs)
    names = jets.first_names + jets.second_names
    cfg = cfg.with_boxes({n: JET_BOX for n in names if n not in cfg.boxes})
    return cfg.replace(positive=tuple(cfg.positive) + tuple(positive),
                       shrink=frozenset(cfg.shrink) | frozenset(names))


@dataclass(frozen=True, eq=False)
class MinSurfLagrangian:
    metric: SplitMetric
    lam: Expr
    L: Expr
    V: Expr
    radicand: Expr
    jets: JetSpace

    @property
    def sqrt_h(self):
        """sqrt|h| in the form dV/du."""
        return diff(self.V, self.metric.u)

    def config(self, base: SampleConfig | None = None) -> SampleConfig:
        return jet_config(self.metric, (self.radicand,), base)

    def with_lambda(self, lam):
        return build_lagrangian(self.metric, lam, volume=self.V)


def _lam_expr(lam):
    if lam is None or (isinstance(lam, str) and lam in ("symbolic", "lam", "lambda")):
        return LAMBDA
    e = as_expr(lam)
    if e.free_symbols - {"lam"}:
        raise ValueError(f"lambda must be a number or the symbol lam, got {to_text(e)}")
    return e


def _positive_sqrt(e):
    # sqrt of a product assumed positive on the box: halve every exponent
    if isinstance(e, Mul):
        return mul(*(_positive_sqrt(f) for f in e.factors))
    if isinstance(e, Pow):
        return power(e.base, e.exp / 2)
    if isinstance(e, Const) and e.value > 0:
        return power(e, Fraction(1, 2))
    return power(e, Fraction(1, 2))


def volume_potential(m: SplitMetric, cfg: SampleConfig | None = None) -> Expr:
    """V with dV/du = sqrt|h|: the metric's own, else a pattern-table antiderivative."""
    if m.volume is not None:
        return m.volume
    root = _positive_sqrt(det_abs(m))
    try:
        V = antiderivative(root, m.u)
    except IntegrationPatternMiss as exc:
        raise NoVolumePotential(f"{m.name}: no closed-form integral of sqrt|h| in {m.u}: {exc}") from exc
    check = is_zero(add(diff(V, m.u), neg(power(det_abs(m), Fraction(1, 2)))), m.sample_config(cfg))
    if check.status is not Status.ZERO:
        raise NoVolumePotential(f"{m.name}: candidate V fails dV/du = sqrt|h| ({check.status.value})")
    return V


def build_lagrangian(m: SplitMetric, lam="symbolic", volume: Expr | None = None) -> MinSurfLagrangian:
    jets = JetSpace(m.u, m.xs)
    dh = det_abs(m)
    hinv = inverse(m)
    n = len(m.xs)
    grad = []
    for i in range(n):
        for j in range(n):
            grad.append(mul(dh, hinv[i][j], jets.first(m.xs[i]), jets.first(m.xs[j])))
    radicand = add(dh, *grad)
    V = volume if volume is not None else volume_potential(m)
    lam_e = _lam_expr(lam)
    L = add(power(radicand, Fraction(1, 2)), mul(lam_e, V))
    return MinSurfLagrangian(m, lam_e, L, V, radicand, jets)


# ---------------------------------------------------------------------------
# prolongation and the raw Noether condition


def first_prolongation(X: VectorField, jets: JetSpace) -> dict:
    """eta_i = eta_,i + u_i eta_,u - xi^j_,i u_j - u_i u_j xi^j_,u for each x^i."""
    eta = X.component(jets.u)
    out = {}
    for x in jets.xs:
        ui = jets.first(x)
        terms = [diff(eta, x), mul(ui, diff(eta, jets.u))]
        for y in jets.xs:
            xi = X.component(y)
            uj = jets.first(y)
            terms.append(neg(mul(diff(xi, x), uj)))
            terms.append(neg(mul(ui, uj, diff(xi, jets.u))))
        out[x] = add(*terms)
    return out


def _total_div(F: dict, jets: JetSpace) -> Expr:
    # D_i F^i for F a function of (u, x) only
    return add(*(jets.total_derivative(F.get(x, ZERO), x) for x in jets.xs))


def noether_condition_residual(X: VectorField, lag: MinSurfLagrangian, A: dict | None = None,
                               div_phi: Expr | None = None) -> Expr:
    """X^[1] L + L D_i xi^i - D_i A^i.

    `div_phi`, when given, is subtracted as the divergence of an extra
    x-only gauge part whose components need not be written down.
    """
    jets = lag.jets
    L = lag.L
    pro = first_prolongation(X, jets)
    terms = [mul(X.component(jets.u), diff(L, jets.u))]
    for x in jets.xs:
        terms.append(mul(X.component(x), diff(L, x)))
        terms.append(mul(pro[x], diff(L, jets.first(x).name)))
    div_xi = _total_div({x: X.component(x) for x in jets.xs}, jets)
    terms.append(mul(L, div_xi))
    if A:
        terms.append(neg(_total_div(A, jets)))
    if div_phi is not None:
        terms.append(neg(div_phi))
    return add(*terms)


# ---------------------------------------------------------------------------
# gauge construction


@dataclass(frozen=True)
class GaugeVector:
    """Gauge field A^k = lam * W^k + Phi^k(x).

    `R` is the divergence Phi^k_,k must have; `phi` is one realization
    (everything in the first component) or None when the x-integral of R is
    outside the pattern table.
    """

    A: dict
    W: dict
    phi: dict | None
    R: Expr
    status: str
    reason: str = ""
    r_check: ZeroResult | None = None

    @property
    def constructed(self):
        return self.status == CONSTRUCTED

    def text(self):
        return {k: to_text(v) for k, v in sorted(self.A.items())}


def _u_midpoint(m, cfg):
    lo, hi = cfg.box(m.u)[0]
    return Fraction((lo + hi) / 2).limit_denominator(1000)


def _verified_antiderivative(f, var, cfg):
    F = expand(antiderivative(f, var))
    chk = is_zero(add(diff(F, var), neg(f)), cfg)
    if chk.status is not Status.ZERO:
        raise IntegrationPatternMiss(f"antiderivative in {var} failed its derivative check")
    return F


def construct_gauge(X: VectorField, lag: MinSurfLagrangian, cfg: SampleConfig | None = None) -> GaugeVector:
    """Build A^k from the u-integral of V xi^k_,u and the x-only remainder Phi^k."""
    m = lag.metric
    u = m.u
    cfg = m.sample_config(cfg)
    V = lag.V
    W = {}
    for x in m.xs:
        dxi = diff(X.component(x), u)
        W[x] = ZERO if dxi == ZERO else _verified_antiderivative(mul(V, dxi), u, cfg)
    lam = lag.lam
    div = [diff(mul(V, X.component(x)), x) for x in m.xs]
    div += [mul(lag.sqrt_h, X.eta(m))]
    div += [neg(diff(W[x], x)) for x in m.xs]
    R = mul(lam, add(*div))
    A_lam = {x: mul(lam, W[x]) for x in m.xs}
    dRu = is_zero(diff(R, u), cfg)
    if dRu.status is not Status.ZERO:
        return GaugeVector(A_lam, W, None, R, NO_SOLUTION,
                           f"Phi-divergence depends on {u} ({dRu.status.value})", dRu)
    phi = _realize_phi(R, m, cfg)
    if phi is None:
        A = A_lam
        reason = "Phi exists but its x-integral is outside the pattern table"
    else:
        A = {x: add(A_lam[x], phi[x]) for x in m.xs}
        reason = ""
    return GaugeVector(A, W, phi, R, CONSTRUCTED, reason, dRu)


def _realize_phi(R, m, cfg):
    zero = {x: ZERO for x in m.xs}
    if R == ZERO or is_zero(R, cfg).status is Status.ZERO:
        return zero
    x1 = m.xs[0]
    Rx = pythagorean(R)
    if m.u in Rx.depends:
        Rx = pythagorean(substitute(Rx, m.u, Const(_u_midpoint(m, cfg))))
    try:
        P = antiderivative(Rx, x1)
    except IntegrationPatternMiss:
        log.info("Phi for %s: x-integral outside the pattern table", m.name)
        return None
    if is_zero(add(diff(P, x1), neg(R)), cfg).status is not Status.ZERO:
        return None
    zero[x1] = expand(P)
    return zero


# ---------------------------------------------------------------------------
# coefficient split


def split_conditions(X: VectorField, lag: MinSurfLagrangian, A: dict | None = None,
                     cfg: SampleConfig | None = None) -> dict:
    """Residual verdicts of the coefficient-split conditions.

    Keys: ``order0`` (|h|_,u eta + 2|h| xi^k_;k), ``order1:<k>``
    (h^{ik} eta_,i + xi^k_,u), ``order2:<i>,<j>`` (-2 xi^(i;j) + h^ij_,u eta
    + 2 h^ij eta_,u), ``gauge_divergence`` and ``gauge_u:<k>`` for the
    lam-terms, plus the derived ``eta_u`` and ``killing_slice:<i>,<j>``
    (2 xi^(i;j) - eta h^ij_,u).  Values are ``(expr, ZeroResult)``.
    """
    m = lag.metric
    u, xs = m.u, m.xs
    n = len(xs)
    cfg = m.sample_config(cfg)
    if A is None:
        A = construct_gauge(X, lag, cfg).A
    eta = X.eta(m)
    xi = X.xi(m)
    dh = det_abs(m)
    hinv = inverse(m)
    G = christoffel(m)
    out = {}

    div_cov = add(*(diff(xi[k], xs[k]) for k in range(n)),
                  *(mul(G[k][k][l], xi[l]) for k in range(n) for l in range(n)))
    out["order0"] = add(mul(diff(dh, u), eta), mul(2, dh, div_cov))
    for k in range(n):
        out[f"order1:{xs[k]}"] = add(*(mul(hinv[i][k], diff(eta, xs[i])) for i in range(n)),
                                     diff(xi[k], u))
    sym_up = sym_covariant_derivative(X, m, index="upper")
    eta_u = diff(eta, u)
    for i in range(n):
        for j in range(i, n):
            hu = diff(hinv[i][j], u)
            out[f"order2:{xs[i]},{xs[j]}"] = add(mul(-2, sym_up[i][j]), mul(hu, eta),
                                                 mul(2, hinv[i][j], eta_u))
            out[f"killing_slice:{xs[i]},{xs[j]}"] = add(mul(2, sym_up[i][j]), neg(mul(eta, hu)))
    lam, V = lag.lam, lag.V
    g0 = [mul(lam, diff(V, xs[k]), xi[k]) for k in range(n)]
    g0.append(mul(lam, lag.sqrt_h, eta))
    g0 += [mul(lam, V, diff(xi[k], xs[k])) for k in range(n)]
    g0 += [neg(diff(A.get(x, ZERO), x)) for x in xs]
    out["gauge_divergence"] = add(*g0)
    for x in xs:
        out[f"gauge_u:{x}"] = add(mul(lam, V, diff(X.component(x), u)), neg(diff(A.get(x, ZERO), u)))
    out["eta_u"] = eta_u
    return {k: (e, is_zero(e, cfg)) for k, e in out.items()}


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class NoetherVerdict:
    label: str
    killing: object
    conditions: dict
    gauge: GaugeVector | None
    residual: ZeroResult
    overall: str
    failing: str | None = None
    lam_mode: str = "symbolic"
    notes: tuple = field(default_factory=tuple)

    @property
    def is_noether(self):
        return self.overall == NOETHER


def _lam_mode(lag):
    return "symbolic" if lag.lam == LAMBDA else f"numeric:{to_text(lag.lam)}"


def check_theorem2(X: VectorField, lag: MinSurfLagrangian, cfg: SampleConfig | None = None,
                   with_conditions=True) -> NoetherVerdict:
    """Killing test, gauge construction, then the raw Noether condition as a cross-check."""
    m = lag.metric
    mcfg = m.sample_config(cfg)
    kv = is_killing(X, m, mcfg)
    notes = []
    try:
        gauge = construct_gauge(X, lag, mcfg)
    except IntegrationPatternMiss as exc:
        gauge = GaugeVector({}, {}, None, ZERO, NO_SOLUTION, f"integration: {exc}")
    if gauge.reason:
        notes.append(gauge.reason)
    jcfg = lag.config(cfg)
    if gauge.constructed and gauge.phi is None:
        A_lam = {x: mul(lag.lam, gauge.W[x]) for x in m.xs}
        res_e = noether_condition_residual(X, lag, A_lam, div_phi=gauge.R)
    elif gauge.A:
        res_e = noether_condition_residual(X, lag, gauge.A)
    else:
        res_e = noether_condition_residual(X, lag)
    residual = is_zero(res_e, jcfg)
    conditions = {}
    if with_conditions and gauge.A is not None and (gauge.A or gauge.constructed):
        A_split = gauge.A if gauge.phi is not None else {x: mul(lag.lam, gauge.W[x]) for x in m.xs}
        conditions = split_conditions(X, lag, A_split, mcfg)
        if gauge.constructed and gauge.phi is None:
            # Phi was not written down; its divergence R closes the x-divergence condition
            e, _ = conditions["gauge_divergence"]
            e = add(e, neg(gauge.R))
            conditions["gauge_divergence"] = (e, is_zero(e, mcfg))
    if not kv.is_killing:
        overall, failing = NOT_NOETHER, "killing"
    elif not gauge.constructed:
        overall, failing = NOT_NOETHER, "gauge"
    elif residual.status is not Status.ZERO:
        overall, failing = NOT_NOETHER, "noether_condition"
    else:
        overall, failing = NOETHER, None
    return NoetherVerdict(X.label, kv, conditions, gauge, residual, overall, failing,
                          _lam_mode(lag), tuple(notes))


def check_corollary3(X: VectorField, lag: MinSurfLagrangian, cfg: SampleConfig | None = None) -> NoetherVerdict:
    """lam = 0: Killing fields are Noether symmetries with A = 0."""
    if lag.lam != ZERO:
        raise ValueError("check_corollary3 needs a Lagrangian with lam = 0")
    m = lag.metric
    kv = is_killing(X, m, m.sample_config(cfg))
    residual = is_zero(noether_condition_residual(X, lag), lag.config(cfg))
    zero = {x: ZERO for x in m.xs}
    gauge = GaugeVector(zero, zero, zero, ZERO, CONSTRUCTED)
    if not kv.is_killing:
        overall, failing = NOT_NOETHER, "killing"
    elif residual.status is not Status.ZERO:
        overall, failing = NOT_NOETHER, "noether_condition"
    else:
        overall, failing = NOETHER, None
    return NoetherVerdict(X.label, kv, {}, gauge, residual, overall, failing, "numeric:0")


# ---------------------------------------------------------------------------
# currents and the Euler-Lagrange equation


@dataclass(frozen=True)
class NoetherCurrent:
    components: dict

    def divergence(self, jets: JetSpace) -> Expr:
        return add(*(jets.total_derivative(self.components[x], x) for x in jets.xs))


def noether_current(X: VectorField, lag: MinSurfLagrangian, A: dict | None = None) -> NoetherCurrent:
    """I^i = xi^k u_k dL/du_i - xi^i L - eta dL/du_i + A^i."""
    jets = lag.jets
    A = A or {}
    L = lag.L
    eta = X.component(jets.u)
    flux = add(*(mul(X.component(k), jets.first(k)) for k in jets.xs))
    out = {}
    for x in jets.xs:
        dL = diff(L, jets.first(x).name)
        out[x] = add(mul(flux, dL), neg(mul(X.component(x), L)), neg(mul(eta, dL)),
                     A.get(x, ZERO))
    return NoetherCurrent(out)


def euler_lagrange(lag: MinSurfLagrangian) -> Expr:
    """dL/du - D_i (dL/du_i), second order in the jets."""
    jets = lag.jets
    L = lag.L
    terms = [diff(L, jets.u)]
    for x in jets.xs:
        terms.append(neg(jets.total_derivative(diff(L, jets.first(x).name), x)))
    return add(*terms)
