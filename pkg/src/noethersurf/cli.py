"""Command-line front end: ``noethersurf {list,check,reduce}``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from .catalogue import CatalogueEntry, load, names, read_metric_file
from .errors import (
    NoetherSurfError, ParseError, ReductionError, ValidationError,
)
from .expr import (
    DEFAULT_SEED, SampleConfig, Status, add, as_expr, is_zero, mul, neg, to_text,
)
from .noether import LAMBDA, build_lagrangian, check_theorem2, euler_lagrange
from .reduction import (
    DomainExit, compare_up_to_factor, dust_ode_reference, integrate, reduce, write_trace,
)

log = logging.getLogger("noethersurf")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_MISMATCH = 4
EXIT_ENGINE = 5
EXIT_REDUCTION = 6


@dataclass
class RunConfig:
    command: str
    metric: str | None = None
    file: str | None = None
    fields: str = "all"
    lam: str = "symbolic"
    seed: int = DEFAULT_SEED
    samples: int = 100
    tol: float = 1e-9
    format: str = "text"
    out: str | None = None
    by: str | None = None
    integrate: bool = False
    s0: float = 1.0
    sp0: float = 0.0
    span: str = "0:0.5"
    verify_paper: bool = False
    trace: str | None = None
    jobs: int = 4

    @classmethod
    def from_args(cls, ns):
        kw = {k: v for k, v in vars(ns).items() if k in cls.__dataclass_fields__}
        kw["lam"] = ns.lam
        return cls(**kw)

    def sample_config(self):
        return SampleConfig(n=self.samples, eps=self.tol, seed=self.seed)

    @property
    def symbolic(self):
        return self.lam in ("symbolic", "lam", "lambda")

    def lam_value(self):
        return "symbolic" if self.symbolic else as_expr(self.lam)

    def lam_key(self):
        return "symbolic" if self.symbolic else to_text(as_expr(self.lam))


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _g(v):
    return f"{v:.3g}" if isinstance(v, float) else str(v)


def _zr(r):
    out = {"verdict": r.status.value, "max_residual": _num(r.max_residual)}
    if r.witness:
        out["witness"] = {k: _num(v) for k, v in sorted(r.witness.items())}
    return out


def _entry(cfg: RunConfig) -> CatalogueEntry:
    if cfg.file:
        return read_metric_file(cfg.file)
    if not cfg.metric:
        raise ValidationError("MetricSource", "give --metric NAME or --file PATH")
    return load(cfg.metric)


# ---------------------------------------------------------------------------
# check


def _check_one(X, lag, entry, cfg: RunConfig, scfg):
    v = check_theorem2(X, lag, scfg)
    g = v.gauge
    rec = {
        "label": X.label,
        "verdict": v.overall,
        "failing": v.failing,
        "killing": _zr(v.killing.result),
        "conditions": {k: _zr(r) for k, (_, r) in sorted(v.conditions.items())},
        "noether_residual": _zr(v.residual),
        "gauge": {
            "status": g.status,
            "reason": g.reason,
            "A": {k: to_text(e) for k, e in sorted(g.A.items())},
            "phi_divergence": to_text(g.R),
        },
        "notes": list(v.notes),
    }
    fixture = {}
    key = cfg.lam_key()
    expected = entry.expect.get((X.label, key))
    if expected is not None:
        ok = expected[0] == v.overall and (len(expected) < 2 or expected[1] == v.failing)
        fixture["expected"] = " ".join(expected)
        fixture["verdict_match"] = ok
    if cfg.symbolic and X.label in entry.gauges and g.W:
        ok = True
        for coord, want in sorted(entry.gauges[X.label].items()):
            got = mul(LAMBDA, g.W.get(coord, as_expr(0)))
            r = is_zero(add(got, neg(want)), lag.metric.sample_config(scfg))
            ok = ok and r.status is Status.ZERO
        fixture["gauge_expected"] = {k: to_text(e) for k, e in sorted(entry.gauges[X.label].items())}
        fixture["gauge_match"] = ok
    rec["fixture"] = fixture or None
    return rec


def cmd_check(cfg: RunConfig):
    entry = _entry(cfg)
    scfg = cfg.sample_config()
    lag = build_lagrangian(entry.metric, cfg.lam_value())
    selected = entry.select(cfg.fields)
    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        records = list(pool.map(lambda X: _check_one(X, lag, entry, cfg, scfg), selected))
    records.sort(key=lambda r: r["label"])
    mismatches = [r["label"] for r in records if r["fixture"] and (
        r["fixture"].get("verdict_match") is False or r["fixture"].get("gauge_match") is False)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "metric": entry.name,
        "lambda_mode": "symbolic" if cfg.symbolic else "numeric",
        "lambda": cfg.lam_key(),
        "lagrangian": to_text(lag.L),
        "sampling": {"seed": cfg.seed, "samples": cfg.samples, "tol": cfg.tol},
        "fields": records,
        "summary": {
            "total": len(records),
            "noether": sum(r["verdict"] == "NoetherSymmetry" for r in records),
            "not_noether": sum(r["verdict"] != "NoetherSymmetry" for r in records),
            "fixture_mismatches": mismatches,
        },
    }
    return report, (EXIT_MISMATCH if mismatches else EXIT_OK)


def _check_text(rep):
    lines = [f"metric {rep['metric']}  lambda={rep['lambda']} ({rep['lambda_mode']})",
             f"L = {rep['lagrangian']}"]
    for r in rep["fields"]:
        lines.append(f"{r['label']}: {r['verdict']}" + (f" (fails: {r['failing']})" if r["failing"] else ""))
        lines.append(f"  killing {r['killing']['verdict']} max|L_X g| = {_g(r['killing']['max_residual'])}")
        lines.append(f"  noether condition {r['noether_residual']['verdict']}"
                     f" max = {_g(r['noether_residual']['max_residual'])}")
        lines.append(f"  gauge {r['gauge']['status']}" + (f": {r['gauge']['reason']}" if r["gauge"]["reason"] else ""))
        for k, v in r["gauge"]["A"].items():
            lines.append(f"    A^{k} = {v}")
        fx = r["fixture"]
        if fx:
            if "verdict_match" in fx:
                lines.append(f"  fixture verdict {fx['expected']}: {'match' if fx['verdict_match'] else 'MISMATCH'}")
            if "gauge_match" in fx:
                lines.append(f"  fixture gauge: {'match' if fx['gauge_match'] else 'MISMATCH'}")
                if not fx["gauge_match"]:
                    for k, v in fx["gauge_expected"].items():
                        lines.append(f"    expected A^{k} = {v}")
    s = rep["summary"]
    lines.append(f"{s['noether']}/{s['total']} NoetherSymmetry; fixture mismatches: "
                 + (", ".join(s["fixture_mismatches"]) or "none"))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# reduce


def _span(text):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return 0.0, float(parts[0])
        if len(parts) == 2:
            return float(parts[0]), float(parts[1])
    except ValueError:
        pass
    raise ValidationError("Span", f"expected LENGTH or X0:X1, got {text!r}")


def cmd_reduce(cfg: RunConfig):
    entry = _entry(cfg)
    if not cfg.by:
        raise ValidationError("Reduce", "--by is required")
    lag = build_lagrangian(entry.metric, "symbolic")
    el = euler_lagrange(lag)
    syms = []
    for label in (s.strip() for s in cfg.by.split(",") if s.strip()):
        syms.append(entry.fields.get(label, label))
    problem = reduce(el, lag.jets, syms, cfg.sample_config())
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "reduce",
        "metric": entry.name,
        "by": list(problem.provenance),
        "eliminated": list(problem.eliminated),
        "variable": problem.variable,
        "ode": to_text(problem.ode),
    }
    code = EXIT_OK
    if cfg.verify_paper:
        ref = dust_ode_reference()
        prop = compare_up_to_factor(problem.ode, ref, cfg.sample_config().replace(n=50))
        report["verify_paper"] = {
            "reference": to_text(ref),
            "verdict": prop.verdict,
            "factor": None if prop.factor is None else _num(prop.factor),
            "spread": _num(prop.spread),
        }
        if not prop.proportional:
            code = EXIT_MISMATCH
    if cfg.integrate:
        if cfg.symbolic:
            raise ValidationError("Lambda", "integration needs a numeric --lambda")
        lam = float(as_expr(cfg.lam).value)
        x0, x1 = _span(cfg.span)
        sol = integrate(problem, x0, cfg.s0, cfg.sp0, lam, x1 - x0)
        trace = cfg.trace or f"{entry.name}-trace.txt"
        write_trace(sol, trace)
        report["integration"] = {
            "lambda": _num(lam),
            "initial": [_num(x0), _num(cfg.s0), _num(cfg.sp0)],
            "status": sol.status,
            "reason": sol.reason,
            "points": int(len(sol.x)),
            "endpoint": [_num(sol.x[-1]), _num(sol.s[-1]), _num(sol.sp[-1])],
            "max_residual": _num(sol.residual.max()),
            "integrator": dict(sorted(sol.meta.items())),
            "trace": trace,
        }
    return report, code


def _reduce_text(rep):
    lines = [f"metric {rep['metric']}: reduced by {', '.join(rep['by'])} to an ODE in {rep['variable']}",
             f"  {rep['ode']} = 0"]
    vp = rep.get("verify_paper")
    if vp:
        lines.append(f"published ODE: {vp['verdict']}" + (f", factor {vp['factor']:.12g}" if vp["factor"] is not None else "")
                     + f" (spread {_g(vp['spread'])})")
    it = rep.get("integration")
    if it:
        x, s, sp = it["endpoint"]
        lines.append(f"integration {it['status']}" + (f" ({it['reason']})" if it["reason"] else "")
                     + f": {it['points']} points, endpoint x={x:.10g} s={s:.10g} s'={sp:.10g},"
                     f" max residual {_g(it['max_residual'])}; trace -> {it['trace']}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# list


def _describe(entry: CatalogueEntry):
    m = entry.metric
    return {
        "name": m.name,
        "coords": list(m.coords),
        "u": m.u,
        "signature": m.signature,
        "g_uu": m.g_uu,
        "fields": entry.field_names(),
        "fixtures": bool(entry.expect or entry.gauges),
        "note": entry.note,
    }


def cmd_list(cfg: RunConfig):
    if cfg.metric or cfg.file:
        entries = [_describe(_entry(cfg))]
    else:
        entries = [_describe(load(n)) for n in names()]
    return {"schema_version": SCHEMA_VERSION, "command": "list", "entries": entries}, EXIT_OK


def _list_text(rep):
    lines = []
    for e in rep["entries"]:
        lines.append(f"{e['name']}: coords ({', '.join(e['coords'])}), u = {e['u']}, {e['signature']} slice,"
                     f" fixtures: {'yes' if e['fixtures'] else 'no'}")
        lines.append(f"  fields: {' '.join(e['fields'])}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------


COMMANDS = {"check": (cmd_check, _check_text), "reduce": (cmd_reduce, _reduce_text),
            "list": (cmd_list, _list_text)}


def build_parser():
    p = argparse.ArgumentParser(prog="noethersurf",
                                description="Noether symmetries of constant-volume minimal surfaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--metric", help="catalogue entry name")
        src.add_argument("--file", help="metric file path")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("-v", "--verbose", action="store_true")

    def sampling(sp):
        sp.add_argument("--lambda", dest="lam", default="symbolic",
                        help="'symbolic' (default) or a number")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--tol", type=float, default=1e-9)

    c = sub.add_parser("check", help="Killing and Noether verdicts for vector fields")
    common(c)
    sampling(c)
    c.add_argument("--fields", default="all", help="comma-separated labels or 'all'")
    c.add_argument("--jobs", type=int, default=4)

    r = sub.add_parser("reduce", help="reduce the minimal-surface equation by translations")
    common(r)
    sampling(r)
    r.add_argument("--by", help="comma-separated field labels or coordinates")
    r.add_argument("--verify-paper", action="store_true",
                   help="compare with the published dust-universe ODE")
    r.add_argument("--integrate", action="store_true")
    r.add_argument("--s0", type=float, default=1.0)
    r.add_argument("--sp0", type=float, default=0.0)
    r.add_argument("--span", default="0:0.5", help="LENGTH or X0:X1")
    r.add_argument("--trace", help="trace file path (default METRIC-trace.txt)")

    ls = sub.add_parser("list", help="catalogue entries")
    common(ls)
    return p


def render(report, fmt, text_fn):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return text_fn(report) + "\n"


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not hasattr(ns, "lam"):
        ns.lam = "symbolic"
    cfg = RunConfig.from_args(ns)
    fn, text_fn = COMMANDS[cfg.command]
    try:
        if not cfg.symbolic:
            v = as_expr(cfg.lam)
            if v.free_symbols:
                raise ValidationError("Lambda", f"not a number: {cfg.lam!r}")
        report, code = fn(cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ReductionError, DomainExit) as exc:
        print(f"reduction error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REDUCTION
    except (NoetherSurfError, ArithmeticError) as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    text = render(report, cfg.format, text_fn)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
