from __future__ import annotations

import io
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from noethersurf.catalogue import load
from noethersurf.errors import (
    LeadingCoefficientVanishes, NotTranslation, ResidualDependence,
)
from noethersurf.expr import ZERO, SampleConfig, add, diff, evaluate, mul, parse, substitute_many
from noethersurf.expr.normal import terms_of
from noethersurf.geometry import SplitMetric, VectorField
from noethersurf.noether import JetSpace, build_lagrangian, euler_lagrange, noether_current
from noethersurf.reduction import (
    ORDER, DomainExit, ReducedProblem, compare_up_to_factor, dust_ode_reference, integrate,
    reduce, write_trace,
)


def _dust(by=("y", "z")):
    lag = build_lagrangian(load("frw-dust").metric)
    return lag, reduce(euler_lagrange(lag), lag.jets, list(by))


def _slab():
    h = ((parse("1"), ZERO), (ZERO, parse("1")))
    m = SplitMetric("slab", "z", ("x", "y"), h, volume=parse("z"))
    lag = build_lagrangian(m, 0)
    return lag, reduce(euler_lagrange(lag), lag.jets, ["y"])


def _manufactured(ode_text):
    ode = parse(ode_text)
    return ReducedProblem("x", (), ode, ode, (), ode, JetSpace("s", ("x",)))


# -- reduction --------------------------------------------------------------


def test_dust_ode_matches_published_equation():
    _, p = _dust()
    r = compare_up_to_factor(p.ode, dust_ode_reference(), SampleConfig(n=50))
    assert r.proportional, r
    assert abs(r.factor - 1.0) < 1e-12
    assert r.spread <= 1e-8


def test_reduced_ode_has_no_eliminated_symbols():
    _, p = _dust()
    assert p.ode.free_symbols <= {"s", "s_x", "s_xx", "lam"}
    assert p.eliminated == ("y", "z")
    assert p.provenance == ("d_y", "d_z")


def test_reduction_is_order_independent():
    _, a = _dust(("y", "z"))
    _, b = _dust(("z", "y"))
    assert a.ode == b.ode


def test_reduction_accepts_vector_fields():
    entry = load("frw-dust")
    lag = build_lagrangian(entry.metric)
    p = reduce(euler_lagrange(lag), lag.jets, [entry.fields["Ty"], entry.fields["Tz"]])
    assert p.ode == _dust()[1].ode


def test_flat_slab_reduces_to_linear_ode():
    _, p = _slab()
    assert p.ode == parse("s_xx")


def test_translation_of_the_dependent_variable_is_rejected():
    lag = build_lagrangian(load("frw-dust").metric)
    with pytest.raises(NotTranslation):
        reduce(euler_lagrange(lag), lag.jets, ["y", "t"])


def test_rotation_is_not_a_translation():
    entry = load("frw-dust")
    lag = build_lagrangian(entry.metric)
    with pytest.raises(NotTranslation):
        reduce(euler_lagrange(lag), lag.jets, [entry.fields["Ty"], entry.fields["Rx"]])


def test_explicit_dependence_is_detected():
    jets = JetSpace("u", ("x", "y"))
    with pytest.raises(ResidualDependence):
        reduce(parse("u_x_x + y*u"), jets, ["y"])


def test_compare_up_to_factor():
    e = dust_ode_reference()
    r = compare_up_to_factor(e, mul(7, e))
    assert r.proportional and abs(r.factor - 1 / 7) < 1e-12
    assert compare_up_to_factor(mul(7, e), e).factor == pytest.approx(7.0, rel=1e-12)
    assert not compare_up_to_factor(e, add(e, parse("s"))).proportional
    zero_both = compare_up_to_factor(parse("lam - lam"), parse("0*s"))
    assert not zero_both.proportional and "0/0" in zero_both.reason


# -- integration ------------------------------------------------------------


def _scipy_rhs(problem, lam):
    a = problem.ode
    A = diff(a, "s_xx")
    B = substitute_many(a, {"s_xx": ZERO})

    def f(x, y):
        b = {"x": x, "s": y[0], "s_x": y[1], "lam": lam}
        return [y[1], -float(evaluate(B, b)) / float(evaluate(A, b))]

    return f


@pytest.mark.parametrize("lam", [0.0, 0.5, -0.5])
def test_integrator_against_scipy(lam):
    _, p = _dust()
    sol = integrate(p, 0.0, 1.0, 0.0, lam=lam, span=0.4)
    assert sol.completed
    ref = solve_ivp(_scipy_rhs(p, lam), (0.0, 0.4), [1.0, 0.0], method="DOP853",
                    rtol=1e-12, atol=1e-12)
    assert abs(sol.s[-1] - ref.y[0, -1]) <= 1e-6 * abs(ref.y[0, -1])
    assert abs(sol.sp[-1] - ref.y[1, -1]) <= 1e-6 * (1 + abs(ref.y[1, -1]))


def test_flat_slab_constant_solution():
    _, p = _slab()
    sol = integrate(p, 0.0, 2.0, 0.0, span=1.0)
    assert np.all(sol.s == 2.0) and np.all(sol.sp == 0.0)


def test_dust_trace_residual():
    _, p = _dust()
    sol = integrate(p, 1.0, 1.0, 0.0, lam=0.0, span=0.5)
    assert sol.completed
    assert np.max(sol.residual) <= 1e-6


def test_self_convergence_on_tolerance_halving():
    _, p = _dust()
    for lam in (0.0, 0.5):
        a = integrate(p, 0.0, 1.0, 0.0, lam=lam, span=0.5, rtol=1e-8)
        b = integrate(p, 0.0, 1.0, 0.0, lam=lam, span=0.5, rtol=5e-9)
        assert abs(a.s[-1] - b.s[-1]) < 1e-6 * abs(b.s[-1])


@pytest.mark.parametrize("ode,s0,sp0,exact", [
    ("s_xx - s", 1.0, 0.0, lambda x: math.cosh(x)),
    ("s_xx - 2*s^3", 1.0, 1.0, lambda x: 1 / (1 - x)),
])
def test_fixed_step_convergence_order(ode, s0, sp0, exact):
    p = _manufactured(ode)
    errs = []
    hs = (0.02, 0.01, 0.005)
    for h in hs:
        sol = integrate(p, 0.0, s0, sp0, span=0.5, h=h)
        assert sol.meta["step_policy"] == "fixed"
        errs.append(abs(sol.s[-1] - exact(0.5)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(abs(o - ORDER) <= 0.5 for o in orders), orders


def test_blowup_is_a_domain_exit():
    _, p = _dust()
    sol = integrate(p, 0.0, 1.0, 1.0, lam=0.0, span=3.0)
    assert sol.status == "DomainExit"
    # scipy gives up at the same singularity
    ref = solve_ivp(_scipy_rhs(p, 0.0), (0.0, 3.0), [1.0, 1.0], method="DOP853",
                    rtol=1e-10, atol=1e-10)
    assert ref.status == -1
    assert abs(sol.x[-1] - ref.t[-1]) < 1e-4
    with pytest.raises(DomainExit) as info:
        integrate(p, 0.0, 1.0, 1.0, lam=0.0, span=3.0, strict=True)
    assert info.value.solution is not None and len(info.value.solution.x) > 1


def test_integration_preconditions():
    _, p = _dust()
    with pytest.raises(ValueError):
        integrate(p, 0.0, -1.0, 0.0)
    q = _manufactured("x*s_xx + s")
    with pytest.raises(LeadingCoefficientVanishes):
        integrate(q, 0.0, 1.0, 0.0)


def test_reduction_soundness_on_dust_trace():
    # s(x) extended constantly in y and z solves the original equation
    lag, p = _dust()
    lam = 0.5
    sol = integrate(p, 0.0, 1.0, 0.3, lam=lam, span=0.5)
    EL = euler_lagrange(lag)
    terms = terms_of(EL)
    f = _scipy_rhs(p, lam)
    rng = np.random.default_rng(11)
    jets = lag.jets
    for i in range(0, len(sol.x), max(1, len(sol.x) // 15)):
        b = {n: 0.0 for n in jets.first_names + jets.second_names}
        b.update({"x": sol.x[i], "y": rng.uniform(-1, 1), "z": rng.uniform(-1, 1), "lam": lam,
                  "t": sol.s[i], "t_x": sol.sp[i], "t_x_x": f(sol.x[i], [sol.s[i], sol.sp[i]])[1]})
        vals = [float(evaluate(t, b)) for t in terms]
        assert abs(sum(vals)) <= 1e-8 * (1 + max(abs(v) for v in vals))


def test_reduction_soundness_on_flat_slab():
    lag, _ = _slab()
    EL = euler_lagrange(lag)
    for a, c in ((0.3, 1.0), (-2.0, 0.5)):
        b = {n: 0.0 for n in lag.jets.first_names + lag.jets.second_names}
        b.update({"x": 0.7, "y": 0.1, "z": a * 0.7 + c, "z_x": a})
        assert abs(float(evaluate(EL, b))) <= 1e-12


def test_translation_current_conserved_along_dust_solution():
    lag, p = _dust()
    lam = 0.5
    sol = integrate(p, 0.0, 1.0, 0.2, lam=lam, span=0.4)
    I = noether_current(VectorField("Ty", {"y": 1}), lag)
    div = I.divergence(lag.jets)
    f = _scipy_rhs(p, lam)
    jets = lag.jets
    for x, s, sp in zip(sol.x, sol.s, sol.sp):
        b = {n: 0.0 for n in jets.first_names + jets.second_names}
        b.update({"x": x, "y": 0.3, "z": -0.2, "lam": lam, "t": s, "t_x": sp,
                  "t_x_x": f(x, [s, sp])[1]})
        assert abs(float(evaluate(div, b))) <= 1e-8


def test_trace_format(tmp_path):
    _, p = _dust()
    sol = integrate(p, 0.0, 1.0, 0.0, lam=0.5, span=0.2)
    buf = io.StringIO()
    text = write_trace(sol, buf)
    assert buf.getvalue() == text
    lines = text.splitlines()
    assert lines[0] == "x s s' residual"
    rows = np.array([[float(v) for v in line.split()] for line in lines[1:]])
    np.testing.assert_array_equal(rows[:, 0], sol.x)
    np.testing.assert_array_equal(rows[:, 1], sol.s)
    path = tmp_path / "trace.txt"
    write_trace(sol, path)
    assert path.read_bytes() == text.encode("ascii")
    assert "," not in text
