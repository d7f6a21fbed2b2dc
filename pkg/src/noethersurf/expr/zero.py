"""Randomized identity testing.

An expression is declared identically zero when its canonical form is the
literal 0, or when it evaluates below a scale-relative tolerance at every
one of N random points drawn from per-symbol boxes.
"""
from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

import numpy as np

from ..errors import DomainError
from .core import ZERO, Add, Expr
from .evaluate import evaluate

__all__ = [
    "DEFAULT_SEED", "SampleConfig", "Status", "ZeroResult",
    "draw_samples", "is_zero", "combine", "default_box",
]

log = logging.getLogger(__name__)

DEFAULT_SEED = 20140611
ANGULAR = frozenset({"theta", "phi", "psi", "chi", "vartheta", "varphi"})
LAMBDA_NAMES = frozenset({"lam", "lambda"})
ROBUST = 1e3


def _intervals(box):
    if len(box) == 2 and all(isinstance(v, (int, float)) for v in box):
        box = (box,)
    return tuple((float(lo), float(hi)) for lo, hi in box)


def default_box(name):
    if name in LAMBDA_NAMES:
        return ((-1.0, -0.1), (0.1, 1.0))
    if name.endswith("'"):
        return ((-1.0, 1.0),)
    if name in ANGULAR:
        return ((0.1, 1.4),)
    return ((0.5, 3.0),)


@dataclass(frozen=True)
class SampleConfig:
    """Sampling plan for `is_zero`.

    `positive` lists expressions that must be > 0 at every sample (square-root
    radicands); when one fails, the boxes of the `shrink` symbols are halved
    and everything is redrawn.  `nonzero` lists singular loci to stay away from.
    """

    n: int = 100
    eps: float = 1e-9
    seed: int = DEFAULT_SEED
    boxes: Mapping[str, tuple] = field(default_factory=dict)
    positive: tuple = ()
    nonzero: tuple = ()
    shrink: frozenset = frozenset()
    margin: float = 1e-6

    def box(self, name):
        b = self.boxes.get(name)
        return _intervals(b) if b is not None else default_box(name)

    def with_boxes(self, boxes):
        merged = dict(self.boxes)
        merged.update(boxes)
        return replace(self, boxes=merged)

    def replace(self, **changes):
        return replace(self, **changes)


class Status(str, Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ZeroResult:
    status: Status
    max_residual: float = 0.0
    witness: dict | None = None

    @property
    def is_zero(self):
        return self.status is Status.ZERO

    def __bool__(self):
        return self.is_zero


def _draw(name, intervals, n, seed, attempt):
    rng = np.random.default_rng([seed, zlib.crc32(name.encode()), attempt])
    lens = np.array([hi - lo for lo, hi in intervals])
    pick = rng.choice(len(intervals), size=n, p=lens / lens.sum())
    u = rng.random(n)
    lo = np.array([iv[0] for iv in intervals])[pick]
    return lo + u * lens[pick]


def _shrunk(intervals, factor):
    return tuple((lo * factor, hi * factor) for lo, hi in intervals)


def draw_samples(names, cfg: SampleConfig, max_attempts=12):
    """Draw cfg.n points for `names`, honouring positivity and singular-locus constraints."""
    names = set(names)
    for c in (*cfg.positive, *cfg.nonzero):
        names |= c.free_symbols
    names = sorted(names)
    factor = 1.0
    for attempt in range(max_attempts):
        boxes = {}
        for nm in names:
            iv = cfg.box(nm)
            boxes[nm] = _shrunk(iv, factor) if nm in cfg.shrink else iv
        pts = {nm: _draw(nm, boxes[nm], cfg.n, cfg.seed, attempt) for nm in names}
        bad = np.zeros(cfg.n, dtype=bool)
        for c in cfg.nonzero:
            bad |= np.abs(np.broadcast_to(evaluate(c, pts), (cfg.n,))) <= cfg.margin
        pos_ok = True
        for c in cfg.positive:
            if np.any(np.broadcast_to(evaluate(c, pts), (cfg.n,)) <= 0):
                pos_ok = False
        if not pos_ok:
            if not cfg.shrink:
                raise DomainError("positivity constraint fails and no box may shrink")
            factor *= 0.5
            log.info("positivity constraint failed; shrinking %s boxes to factor %g",
                     sorted(cfg.shrink), factor)
            continue
        if bad.any():
            log.info("%d samples hit a singular locus; redrawing", int(bad.sum()))
            continue
        return pts
    raise DomainError("could not draw admissible samples")


def _scale(e, pts, memo, n):
    if isinstance(e, Add):
        terms = [np.abs(np.broadcast_to(evaluate(t, pts, memo), (n,))) for t in e.terms]
        return np.max(terms, axis=0)
    return np.abs(np.broadcast_to(evaluate(e, pts, memo), (n,)))


def is_zero(e: Expr, cfg: SampleConfig | None = None) -> ZeroResult:
    cfg = cfg or SampleConfig()
    if e == ZERO:
        return ZeroResult(Status.ZERO, 0.0)
    pts = draw_samples(e.free_symbols, cfg)
    memo = {}
    val = np.broadcast_to(evaluate(e, pts, memo), (cfg.n,))
    scale = _scale(e, pts, memo, cfg.n)
    tol = cfg.eps * (1.0 + scale)
    err = np.abs(val)
    worst = float(err.max())
    if np.all(err <= tol):
        return ZeroResult(Status.ZERO, worst)
    robust = np.nonzero(err > ROBUST * tol)[0]
    if robust.size:
        i = int(robust[0])
        witness = {k: float(v[i]) for k, v in pts.items() if k in e.free_symbols}
        return ZeroResult(Status.NONZERO, worst, witness)
    return ZeroResult(Status.INCONCLUSIVE, worst)


def combine(results):
    """Fold entrywise verdicts: Zero iff all Zero, NonZero if any NonZero."""
    results = list(results)
    worst = max((r.max_residual for r in results), default=0.0)
    for r in results:
        if r.status is Status.NONZERO:
            return ZeroResult(Status.NONZERO, worst, r.witness)
    if all(r.status is Status.ZERO for r in results):
        return ZeroResult(Status.ZERO, worst)
    return ZeroResult(Status.INCONCLUSIVE, worst)
