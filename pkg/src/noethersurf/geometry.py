"""Split metrics ``ds^2 = g_uu du^2 + h_ij(u, x) dx^i dx^j`` and Killing checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction

from .errors import DegenerateMetric, ValidationError
from .expr import (
    ONE, ZERO, Expr, SampleConfig, Status, add, as_expr, combine, diff, is_zero, mul, neg,
    power, to_text,
)
from .expr.zero import ZeroResult

__all__ = [
    "SplitMetric", "VectorField", "KillingVerdict",
    "det", "det_abs", "inverse", "christoffel", "covariant_derivative",
    "sym_covariant_derivative", "lie_derivative_full_metric", "is_killing",
    "commutator", "validate_metric", "metric_compatibility",
]

MAX_SLICE_DIM = 4


@dataclass(frozen=True, eq=False)
class SplitMetric:
    """Metric with a distinguished coordinate `u` and no ``du dx`` cross terms.

    `signature` describes the slice metric h ("riemannian" or "lorentzian");
    `g_uu` is the sign of the ``du^2`` coefficient.  `volume` is an optional
    potential V with dV/du = sqrt|h|.
    """

    name: str
    u: str
    xs: tuple
    h: tuple
    signature: str = "riemannian"
    g_uu: int = 1
    boxes: dict = field(default_factory=dict)
    singular: tuple = ()
    volume: Expr | None = None
    functions: dict = field(default_factory=dict)
    params: tuple = ("lam",)

    @property
    def coords(self):
        return (self.u, *self.xs)

    @property
    def dim(self):
        return len(self.xs) + 1

    def h_entry(self, i, j):
        return self.h[i][j]

    def sample_config(self, base: SampleConfig | None = None) -> SampleConfig:
        base = base or SampleConfig()
        cfg = base.with_boxes({k: v for k, v in self.boxes.items() if k not in base.boxes})
        return cfg.replace(nonzero=tuple(base.nonzero) + tuple(self.singular))


@dataclass(frozen=True)
class VectorField:
    """Generator ``xi^i(u, x) d_i + eta(u, x) d_u``; missing components are 0."""

    label: str
    components: dict

    def __post_init__(self):
        object.__setattr__(self, "components",
                           {k: as_expr(v) for k, v in self.components.items()})

    def component(self, name):
        return self.components.get(name, ZERO)

    def eta(self, m):
        return self.component(m.u)

    def xi(self, m):
        return tuple(self.component(x) for x in m.xs)

    def scaled(self, c, label=None):
        return VectorField(label or self.label, {k: mul(c, v) for k, v in self.components.items()})

    def text(self):
        return {k: to_text(v) for k, v in sorted(self.components.items())}


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return add(mul(M[0][0], M[1][1]), neg(mul(M[0][1], M[1][0])))
    out = []
    for j in range(n):
        if M[0][j] == ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        sign = 1 if j % 2 == 0 else -1
        out.append(mul(sign, M[0][j], _det(minor)))
    return add(*out)


def _check_dim(m):
    if len(m.xs) > MAX_SLICE_DIM:
        raise ValidationError("DimensionBudget", f"slice dimension {len(m.xs)} > {MAX_SLICE_DIM}")


@lru_cache(maxsize=256)
def det(m: SplitMetric) -> Expr:
    _check_dim(m)
    return _det([list(r) for r in m.h])


@lru_cache(maxsize=256)
def det_abs(m: SplitMetric) -> Expr:
    """|det h|, with the sign fixed by the slice signature."""
    d = det(m)
    if d == ZERO:
        raise DegenerateMetric(f"det h is identically 0 for {m.name}")
    return neg(d) if m.signature == "lorentzian" else d


@lru_cache(maxsize=256)
def inverse(m: SplitMetric):
    """h^{ij} in adjugate / determinant form."""
    _check_dim(m)
    n = len(m.xs)
    d = det(m)
    if d == ZERO:
        raise DegenerateMetric(f"det h is identically 0 for {m.name}")
    inv_d = power(d, -1)
    rows = [list(r) for r in m.h]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if n == 1:
                cof = ONE
            else:
                minor = [r[:i] + r[i + 1:] for k, r in enumerate(rows) if k != j]
                cof = mul((-1) ** (i + j), _det(minor))
            row.append(mul(cof, inv_d))
        out.append(tuple(row))
    return tuple(out)


@lru_cache(maxsize=256)
def christoffel(m: SplitMetric):
    """Gamma^k_ij of h in the x-space, u held fixed.  Indexed [k][i][j]."""
    xs = m.xs
    n = len(xs)
    hinv = inverse(m)
    dh = [[[diff(m.h[a][b], xs[c]) for c in range(n)] for b in range(n)] for a in range(n)]
    low = [[[mul(Fraction(1, 2), add(dh[l][i][j], dh[l][j][i], neg(dh[i][j][l])))
             for j in range(n)] for i in range(n)] for l in range(n)]
    return tuple(
        tuple(tuple(add(*(mul(hinv[k][l], low[l][i][j]) for l in range(n)))
                    for j in range(n)) for i in range(n))
        for k in range(n))


def covariant_derivative(X: VectorField, m: SplitMetric):
    """xi^i_{;k} = xi^i_{,k} + Gamma^i_{kl} xi^l, indexed [i][k]."""
    xs = m.xs
    n = len(xs)
    G = christoffel(m)
    xi = X.xi(m)
    return tuple(
        tuple(add(diff(xi[i], xs[k]), *(mul(G[i][k][l], xi[l]) for l in range(n)))
              for k in range(n))
        for i in range(n))


def sym_covariant_derivative(X: VectorField, m: SplitMetric, index="upper"):
    """Symmetrized covariant derivative of the slice part of X.

    index="upper" gives xi^{(i;j)} (both indices raised with h^{ij});
    index="lower" gives xi_{(i;j)} (both lowered with h_ij).
    """
    n = len(m.xs)
    D = covariant_derivative(X, m)
    if index == "upper":
        hinv = inverse(m)
        full = [[add(*(mul(hinv[j][k], D[i][k]) for k in range(n))) for j in range(n)]
                for i in range(n)]
    elif index == "lower":
        full = [[add(*(mul(m.h[i][l], D[l][j]) for l in range(n))) for j in range(n)]
                for i in range(n)]
    else:
        raise ValueError(f"index must be 'upper' or 'lower', not {index!r}")
    return tuple(tuple(mul(Fraction(1, 2), add(full[i][j], full[j][i])) for j in range(n))
                 for i in range(n))


def lie_derivative_full_metric(X: VectorField, m: SplitMetric):
    """L_X g_ab on the full (u, x) space, assembled block by block.

    Blocks: [h_ij,u eta + 2 xi_(i;j)], [xi^k_,u h_kj + g_uu eta_,j],
    [2 g_uu eta_,u].  Index 0 is u; indices 1.. follow m.xs.
    """
    xs = m.xs
    n = len(xs)
    eta = X.eta(m)
    xi = X.xi(m)
    sym_low = sym_covariant_derivative(X, m, index="lower")
    g = [[None] * (n + 1) for _ in range(n + 1)]
    g[0][0] = mul(2 * m.g_uu, diff(eta, m.u))
    for j in range(n):
        mixed = add(*(mul(diff(xi[k], m.u), m.h[k][j]) for k in range(n)),
                    mul(m.g_uu, diff(eta, xs[j])))
        g[0][j + 1] = g[j + 1][0] = mixed
        for i in range(j, n):
            block = add(mul(diff(m.h[i][j], m.u), eta), mul(2, sym_low[i][j]))
            g[i + 1][j + 1] = g[j + 1][i + 1] = block
    return tuple(tuple(r) for r in g)


@dataclass(frozen=True)
class KillingVerdict:
    result: ZeroResult
    entries: dict

    @property
    def is_killing(self):
        return self.result.status is Status.ZERO

    @property
    def max_residual(self):
        return self.result.max_residual


def is_killing(X: VectorField, m: SplitMetric, cfg: SampleConfig | None = None) -> KillingVerdict:
    cfg = m.sample_config(cfg)
    L = lie_derivative_full_metric(X, m)
    names = m.coords
    entries = {}
    for a in range(len(names)):
        for b in range(a, len(names)):
            entries[(names[a], names[b])] = is_zero(L[a][b], cfg)
    return KillingVerdict(combine(entries.values()), entries)


def commutator(X: VectorField, Y: VectorField, coords, label=None):
    """[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a over the given coordinates."""
    comps = {}
    for a in coords:
        terms = []
        for b in coords:
            terms.append(mul(X.component(b), diff(Y.component(a), b)))
            terms.append(neg(mul(Y.component(b), diff(X.component(a), b))))
        c = add(*terms)
        if c != ZERO:
            comps[a] = c
    return VectorField(label or f"[{X.label},{Y.label}]", comps)


def metric_compatibility(m: SplitMetric):
    """h_ij;k, which must vanish for the Levi-Civita connection.  Indexed [i][j][k]."""
    xs = m.xs
    n = len(xs)
    G = christoffel(m)
    return tuple(
        tuple(
            tuple(add(diff(m.h[i][j], xs[k]),
                      *(neg(mul(G[l][k][i], m.h[l][j])) for l in range(n)),
                      *(neg(mul(G[l][k][j], m.h[i][l])) for l in range(n)))
                  for k in range(n))
            for j in range(n))
        for i in range(n))


def validate_metric(m: SplitMetric, cfg: SampleConfig | None = None):
    """Check the SplitMetric invariants; raises ValidationError / DegenerateMetric."""
    n = len(m.xs)
    if len(m.h) != n or any(len(r) != n for r in m.h):
        raise ValidationError("Shape", f"h must be {n}x{n}")
    for i in range(n):
        for j in range(i + 1, n):
            if m.h[i][j] != m.h[j][i]:
                raise ValidationError("Symmetry", f"h[{m.xs[i]},{m.xs[j]}] != h[{m.xs[j]},{m.xs[i]}]")
    if m.signature not in ("riemannian", "lorentzian"):
        raise ValidationError("Signature", m.signature)
    if m.g_uu not in (1, -1):
        raise ValidationError("Signature", f"g_uu must be +1 or -1, got {m.g_uu}")
    cfg = m.sample_config(cfg)
    d = det(m)
    if d == ZERO or is_zero(d, cfg).status is Status.ZERO:
        raise DegenerateMetric(f"det h vanishes on the sampling box of {m.name}")
    if m.volume is not None:
        r = is_zero(add(diff(m.volume, m.u), neg(power(det_abs(m), Fraction(1, 2)))), cfg)
        if r.status is not Status.ZERO:
            raise ValidationError("VolumePotential", f"dV/d{m.u} != sqrt|h| ({r.status.value})")
    return True
