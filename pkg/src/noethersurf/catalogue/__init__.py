"""Built-in metrics, candidate Killing vectors and golden fixtures.

Metric files are line oriented; ``#`` starts a comment::

    name: sphere3
    coords: theta phi psi
    u: theta
    signature: riemannian          # of the slice metric h
    g_uu: 1
    function nu(R)                 # opaque function of one coordinate
    function W(R) = exp(nu(R))     # opaque antiderivative with declared derivative
    h[phi,phi]: sin(theta)^2       # entries not listed are 0; h[a,b] also sets h[b,a]
    box: theta 0.3 1.4             # one or more intervals per symbol
    singular: sin(theta)           # expressions sampling must keep away from 0
    volume: ...                    # V with dV/du = sqrt|h|
    field X1 phi: sin(psi)         # one component per line
    expect X1 symbolic: NotNoether
    expect X1 0: NoetherSymmetry
    gauge T1 theta: -1/6*lam*r^2   # expected gauge field with Phi = 0
    note: free text
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ParseError, UnknownMetric, ValidationError
from ..expr import ZERO, Expr, parse, to_text
from ..geometry import SplitMetric, VectorField, validate_metric

__all__ = [
    "CatalogueEntry", "ENV_VAR", "SUFFIX", "BUILTIN",
    "load", "names", "parse_user_metric", "print_metric", "read_metric_file",
]

ENV_VAR = "NOETHERSURF_CATALOGUE"
SUFFIX = ".metric"
BUILTIN = ("euclidean3-spherical", "sphere3", "static-spherical", "frw", "frw-dust")

_KEY = re.compile(r"^\s*(?P<key>[A-Za-z_]+)(?P<args>[^:]*)(?::(?P<value>.*))?$")
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*$")
_FUNC = re.compile(r"^\s*(?P<name>[A-Za-z][A-Za-z0-9]*)\((?P<var>[A-Za-z][A-Za-z0-9]*)\)\s*(?:=\s*(?P<deriv>.+))?$")


@dataclass(frozen=True, eq=False)
class CatalogueEntry:
    metric: SplitMetric
    fields: dict
    expect: dict = field(default_factory=dict)
    gauges: dict = field(default_factory=dict)
    note: str = ""

    @property
    def name(self):
        return self.metric.name

    def field_names(self):
        return list(self.fields)

    def select(self, spec="all"):
        if spec in (None, "all"):
            return list(self.fields.values())
        out = []
        for label in (s.strip() for s in spec.split(",") if s.strip()):
            if label not in self.fields:
                raise ValidationError("UnknownField", f"{label!r} not in {self.name}")
            out.append(self.fields[label])
        return out


# ---------------------------------------------------------------------------
# parsing


def _strip_comment(line):
    i = line.find("#")
    return line if i < 0 else line[:i]


def _floats(tokens, lineno, col):
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise ParseError("box bounds must be numbers", lineno, col) from None
    if not vals or len(vals) % 2:
        raise ParseError("box needs pairs of bounds", lineno, col)
    pairs = tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))
    for lo, hi in pairs:
        if not lo < hi:
            raise ParseError(f"empty box interval [{lo}, {hi}]", lineno, col)
    return pairs


def parse_user_metric(text: str, validate=True) -> CatalogueEntry:
    """Parse a metric file; raises ParseError (with line/column) or ValidationError."""
    meta = {}
    functions = {}
    h_raw = {}
    boxes = {}
    singular = []
    fields = {}
    expect = {}
    gauges = {}
    notes = []

    def expr(src, lineno, offset):
        try:
            return parse(src, functions, line=lineno)
        except ParseError as exc:
            raise ParseError(exc.message, lineno, exc.column + offset) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        if line.lstrip().startswith("function "):
            body = line.lstrip()[len("function "):]
            m = _FUNC.match(body)
            if not m:
                raise ParseError("expected 'function NAME(VAR)' or 'function NAME(VAR) = EXPR'",
                                 lineno, 1)
            deriv = None
            if m.group("deriv"):
                offset = raw.index(m.group("deriv"))
                deriv = expr(m.group("deriv"), lineno, offset)
            functions[m.group("name")] = (m.group("var"), deriv)
            continue
        m = _KEY.match(line)
        if not m or m.group("value") is None:
            raise ParseError("expected 'key: value'", lineno, 1)
        key, args, value = m.group("key"), m.group("args").strip(), m.group("value").strip()
        voff = line.index(":") + 1 + (len(m.group("value")) - len(m.group("value").lstrip()))
        if key in ("name", "u", "signature", "g_uu", "coords"):
            meta[key] = (value, lineno)
        elif key == "note":
            notes.append(value)
        elif key == "h":
            mm = re.fullmatch(r"\[\s*(\w+)\s*,\s*(\w+)\s*\]", args)
            if not mm:
                raise ParseError("expected h[a,b]", lineno, 2)
            h_raw[(mm.group(1), mm.group(2))] = (expr(value, lineno, voff), lineno)
        elif key == "box":
            parts = value.split()
            if len(parts) < 3:
                raise ParseError("expected 'box: SYMBOL lo hi [lo hi ...]'", lineno, voff + 1)
            boxes[parts[0]] = _floats(parts[1:], lineno, voff + 1)
        elif key == "singular":
            singular.append(expr(value, lineno, voff))
        elif key == "volume":
            meta["volume"] = (expr(value, lineno, voff), lineno)
        elif key == "field":
            parts = args.split()
            if len(parts) != 2:
                raise ParseError("expected 'field LABEL COORD: EXPR'", lineno, 1)
            fields.setdefault(parts[0], {})[parts[1]] = expr(value, lineno, voff)
        elif key == "expect":
            parts = args.split()
            if len(parts) != 2:
                raise ParseError("expected 'expect LABEL LAMBDA: VERDICT'", lineno, 1)
            verdict = value.split()
            if not verdict or verdict[0] not in ("NoetherSymmetry", "NotNoether"):
                raise ParseError(f"unknown verdict {value!r}", lineno, voff + 1)
            expect[(parts[0], parts[1])] = tuple(verdict)
        elif key == "gauge":
            parts = args.split()
            if len(parts) != 2:
                raise ParseError("expected 'gauge LABEL COORD: EXPR'", lineno, 1)
            gauges.setdefault(parts[0], {})[parts[1]] = expr(value, lineno, voff)
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1)

    for k in ("name", "coords", "u"):
        if k not in meta:
            raise ParseError(f"missing '{k}:' line", len(text.splitlines()) or 1, 1)
    name = meta["name"][0]
    coords = meta["coords"][0].split()
    u, u_line = meta["u"]
    for c in coords:
        if not _NAME.match(c):
            raise ParseError(f"bad coordinate name {c!r} (letters and digits only)", meta["coords"][1], 1)
    if u not in coords:
        raise ParseError(f"u = {u!r} is not among the coordinates", u_line, 1)
    if len(set(coords)) != len(coords):
        raise ParseError("repeated coordinate", meta["coords"][1], 1)
    xs = tuple(c for c in coords if c != u)
    idx = {x: i for i, x in enumerate(xs)}
    n = len(xs)
    h = [[ZERO] * n for _ in range(n)]
    given = {}
    for (a, b), (e, lineno) in h_raw.items():
        if a not in idx or b not in idx:
            raise ParseError(f"h[{a},{b}] refers to a non-slice coordinate", lineno, 1)
        i, j = idx[a], idx[b]
        given[(i, j)] = e
    for (i, j), e in given.items():
        other = given.get((j, i))
        if other is not None and other != e:
            raise ValidationError("Symmetry", f"h[{xs[i]},{xs[j]}] != h[{xs[j]},{xs[i]}]")
        h[i][j] = h[j][i] = e
    signature = meta.get("signature", ("riemannian", 0))[0]
    try:
        g_uu = int(meta.get("g_uu", ("1", 0))[0])
    except ValueError:
        raise ParseError("g_uu must be 1 or -1", meta["g_uu"][1], 1) from None
    volume = meta["volume"][0] if "volume" in meta else None
    metric = SplitMetric(name, u, xs, tuple(tuple(r) for r in h), signature, g_uu,
                         boxes, tuple(singular), volume, dict(functions))
    vfs = {}
    for label, comps in fields.items():
        for c in comps:
            if c not in coords:
                raise ValidationError("FieldComponent", f"{label}: {c!r} is not a coordinate")
        vfs[label] = VectorField(label, comps)
    if validate:
        validate_metric(metric)
    return CatalogueEntry(metric, vfs, expect, gauges, " ".join(notes))


# ---------------------------------------------------------------------------
# printing


def _num(v):
    return repr(float(v))


def print_metric(entry: CatalogueEntry) -> str:
    """Metric file text; parse_user_metric(print_metric(e)) rebuilds e."""
    m = entry.metric
    lines = [f"name: {m.name}", f"coords: {' '.join(m.coords)}", f"u: {m.u}",
             f"signature: {m.signature}", f"g_uu: {m.g_uu}"]
    for fname, (var, deriv) in m.functions.items():
        tail = f" = {to_text(deriv)}" if deriv is not None else ""
        lines.append(f"function {fname}({var}){tail}")
    n = len(m.xs)
    for i in range(n):
        for j in range(i, n):
            if m.h[i][j] != ZERO:
                lines.append(f"h[{m.xs[i]},{m.xs[j]}]: {to_text(m.h[i][j])}")
    for sym_name, box in m.boxes.items():
        iv = box if isinstance(box[0], (tuple, list)) else (box,)
        lines.append(f"box: {sym_name} " + " ".join(f"{_num(lo)} {_num(hi)}" for lo, hi in iv))
    for s in m.singular:
        lines.append(f"singular: {to_text(s)}")
    if m.volume is not None:
        lines.append(f"volume: {to_text(m.volume)}")
    for label, X in entry.fields.items():
        for c in m.coords:
            if c in X.components:
                lines.append(f"field {label} {c}: {to_text(X.components[c])}")
    for (label, lam), verdict in entry.expect.items():
        lines.append(f"expect {label} {lam}: {' '.join(verdict)}")
    for label, comps in entry.gauges.items():
        for c, e in comps.items():
            lines.append(f"gauge {label} {c}: {to_text(e)}")
    if entry.note:
        lines.append(f"note: {entry.note}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# lookup


def _extra_dirs():
    raw = os.environ.get(ENV_VAR, "")
    return [Path(p) for p in raw.split(os.pathsep) if p]


def _builtin_text(name):
    res = resources.files(__name__).joinpath("data", name + SUFFIX)
    return res.read_text(encoding="utf-8") if res.is_file() else None


def names():
    """Catalogue names: extra directories (from the environment) then built-ins."""
    out = []
    for d in _extra_dirs():
        if d.is_dir():
            out += sorted(p.stem for p in d.glob("*" + SUFFIX))
    for b in BUILTIN:
        if b not in out:
            out.append(b)
    return out


def read_metric_file(path) -> CatalogueEntry:
    return parse_user_metric(Path(path).read_text(encoding="utf-8"))


def load(name: str) -> CatalogueEntry:
    for d in _extra_dirs():
        p = d / (name + SUFFIX)
        if p.is_file():
            return read_metric_file(p)
    text = _builtin_text(name) if name in BUILTIN else None
    if text is None:
        raise UnknownMetric(name)
    return _load_builtin(name, text)


_CACHE = {}


def _load_builtin(name, text):
    entry = _CACHE.get(name)
    if entry is None:
        entry = _CACHE[name] = parse_user_metric(text)
    return entry
