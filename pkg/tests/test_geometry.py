from __future__ import annotations

import numpy as np
import pytest

from noethersurf.catalogue import load
from noethersurf.errors import DegenerateMetric, ValidationError
from noethersurf.expr import ONE, ZERO, SampleConfig, Status, add, draw_samples, evaluate, is_zero, mul, neg, parse
from noethersurf.geometry import (
    SplitMetric, VectorField, christoffel, commutator, det_abs, inverse, is_killing,
    lie_derivative_full_metric, metric_compatibility, sym_covariant_derivative, validate_metric,
)

CATALOGUE = ("euclidean3-spherical", "sphere3", "static-spherical", "frw", "frw-dust")


def _m(name):
    return load(name).metric


def _diag(u, xs, entries, **kw):
    n = len(xs)
    h = tuple(tuple(parse(entries[i]) if i == j else ZERO for j in range(n)) for i in range(n))
    return SplitMetric("test", u, tuple(xs), h, **kw)


def test_det_abs_examples():
    assert is_zero(add(det_abs(_m("euclidean3-spherical")), neg(parse("r^4*sin(theta)^2")))).is_zero
    assert is_zero(add(det_abs(_m("sphere3")), neg(parse("sin(theta)^4*sin(phi)^2")))).is_zero
    assert det_abs(_diag("u", ("x", "y"), ["1", "1"])) == ONE


def test_lorentzian_det_is_positive():
    m = _m("static-spherical")
    d = det_abs(m)
    want = parse("exp(nu(R))*exp(2*mu(R))*sin(theta)^2",
                 {"nu": ("R", None), "mu": ("R", None)})
    assert is_zero(add(d, neg(want)), m.sample_config()).is_zero


def test_inverse_examples():
    m = _m("euclidean3-spherical")
    inv = inverse(m)
    assert is_zero(add(inv[0][0], neg(parse("r^(-2)")))).is_zero
    assert is_zero(add(inv[1][1], neg(parse("r^(-2)*sin(theta)^(-2)")))).is_zero
    assert inv[0][1] == ZERO
    frw = _m("frw")
    finv = inverse(frw)
    for i in range(3):
        assert is_zero(add(mul(finv[i][i], frw.h[i][i]), neg(ONE)), frw.sample_config()).is_zero


def test_inverse_of_non_diagonal_metric_against_numpy():
    h = ((parse("1 + x^2"), parse("x*y")), (parse("x*y"), parse("2 + y^2")))
    m = SplitMetric("offdiag", "u", ("x", "y"), h)
    inv = inverse(m)
    rng = np.random.default_rng(1)
    for x, y in rng.uniform(0.5, 3.0, size=(10, 2)):
        b = {"x": x, "y": y}
        H = np.array([[evaluate(e, b) for e in row] for row in h])
        I = np.array([[evaluate(e, b) for e in row] for row in inv])
        np.testing.assert_allclose(I, np.linalg.inv(H), rtol=1e-12)


def _fd_christoffel(m, point, step=1e-5):
    xs = m.xs
    n = len(xs)

    def H(p):
        return np.array([[float(evaluate(m.h[i][j], p)) for j in range(n)] for i in range(n)])

    dH = []
    for c in xs:
        plus, minus = dict(point), dict(point)
        plus[c] += step
        minus[c] -= step
        dH.append((H(plus) - H(minus)) / (2 * step))
    dH = np.array(dH)  # [c][a][b] = h_ab,c
    hinv = np.linalg.inv(H(point))
    G = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                G[k, i, j] = 0.5 * sum(hinv[k, l] * (dH[j, l, i] + dH[i, l, j] - dH[l, i, j])
                                       for l in range(n))
    return G


@pytest.mark.parametrize("name", ["euclidean3-spherical", "sphere3", "frw-dust"])
def test_christoffel_against_finite_differences(name):
    m = _m(name)
    G = christoffel(m)
    n = len(m.xs)
    pts = draw_samples(m.coords, m.sample_config(SampleConfig(n=10)))
    for s in range(10):
        p = {k: float(v[s]) for k, v in pts.items()}
        want = _fd_christoffel(m, p)
        got = np.array([[[float(evaluate(G[k][i][j], p)) for j in range(n)] for i in range(n)]
                        for k in range(n)])
        np.testing.assert_allclose(got, want, atol=1e-7, rtol=1e-7)


def test_christoffel_examples():
    flat = _diag("u", ("x", "y"), ["1", "1"])
    assert all(e == ZERO for a in christoffel(flat) for b in a for e in b)
    e3 = _m("euclidean3-spherical")
    # index order follows xs = (theta, phi)
    assert is_zero(add(christoffel(e3)[0][1][1], parse("sin(theta)*cos(theta)")), e3.sample_config()).is_zero
    s3 = _m("sphere3")
    assert is_zero(add(christoffel(s3)[0][1][1], parse("sin(phi)*cos(phi)")), s3.sample_config()).is_zero


@pytest.mark.parametrize("name", CATALOGUE)
def test_metric_compatibility(name):
    m = _m(name)
    cfg = m.sample_config()
    for row in metric_compatibility(m):
        for col in row:
            for e in col:
                assert is_zero(e, cfg).is_zero


def test_sym_covariant_derivative_examples():
    e3 = load("euclidean3-spherical")
    s3 = load("sphere3")
    for entry, label in ((e3, "K3"), (s3, "X4")):
        m = entry.metric
        S = sym_covariant_derivative(entry.fields[label], m)
        assert all(is_zero(e, m.sample_config()).is_zero for row in S for e in row)


def test_lie_derivative_uu_block():
    m = _m("euclidean3-spherical")
    L = lie_derivative_full_metric(VectorField("u", {"r": parse("r")}), m)
    assert L[0][0] == parse("2")


def test_homothety_is_not_killing_and_witness_matches_2g():
    m = _m("euclidean3-spherical")
    X = VectorField("D", {"r": parse("r")})
    v = is_killing(X, m)
    assert v.result.status is Status.NONZERO
    L = lie_derivative_full_metric(X, m)
    p = {"r": 1.3, "theta": 0.7, "phi": 0.4}
    p.update(v.result.witness)
    g = [[1.0, 0, 0], [0, evaluate(m.h[0][0], p), 0], [0, 0, evaluate(m.h[1][1], p)]]
    got = np.array([[evaluate(e, p) for e in row] for row in L])
    np.testing.assert_allclose(got, 2 * np.array(g), atol=1e-12)


@pytest.mark.parametrize("name,count", [("euclidean3-spherical", 6), ("sphere3", 6),
                                        ("static-spherical", 4), ("frw", 6), ("frw-dust", 6)])
def test_catalogue_fields_are_killing(name, count):
    entry = load(name)
    assert len(entry.fields) == count
    for X in entry.fields.values():
        v = is_killing(X, entry.metric)
        assert v.is_killing, X.label
        assert v.max_residual <= 1e-9


def test_maximally_symmetric_counts():
    # n(n+1)/2 for n = 3
    for name in ("euclidean3-spherical", "sphere3"):
        assert len(load(name).fields) == 6


def _values(X, coords, pts):
    return np.concatenate([np.broadcast_to(evaluate(X.component(c), pts), (len(pts[coords[0]]),))
                           for c in coords])


def test_e3_killing_algebra_closes():
    entry = load("euclidean3-spherical")
    m = entry.metric
    fields = list(entry.fields.values())
    pts = draw_samples(m.coords, m.sample_config(SampleConfig(n=40)))
    basis = np.column_stack([_values(X, m.coords, pts) for X in fields])
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            C = commutator(fields[i], fields[j], m.coords)
            assert is_killing(C, m).is_killing
            target = _values(C, m.coords, pts)
            coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
            assert np.max(np.abs(basis @ coef - target)) <= 1e-8


def test_validate_rejects_degenerate_and_bad_volume():
    with pytest.raises(DegenerateMetric):
        validate_metric(_diag("u", ("x", "y"), ["1", "0"]))
    with pytest.raises(DegenerateMetric):
        validate_metric(_diag("u", ("x", "y"), ["x - x", "1"]))
    bad = _diag("r", ("theta", "phi"), ["r^2", "r^2*sin(theta)^2"], volume=parse("r^3*sin(theta)"))
    with pytest.raises(ValidationError) as info:
        validate_metric(bad)
    assert info.value.invariant == "VolumePotential"


def test_validate_rejects_asymmetric_h():
    h = ((ONE, parse("x")), (parse("y"), ONE))
    with pytest.raises(ValidationError) as info:
        validate_metric(SplitMetric("asym", "u", ("x", "y"), h))
    assert info.value.invariant == "Symmetry"


def test_slice_dimension_budget():
    m = _diag("u", ("a", "b", "c", "d", "e"), ["1"] * 5)
    with pytest.raises(ValidationError):
        det_abs(m)
