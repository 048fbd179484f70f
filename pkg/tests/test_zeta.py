import cmath
import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fractal_zeta import zeta as Z
from fractal_zeta.decimation import preimage_set, spectrum
from fractal_zeta.graphs import build_graph, interior, laplacian
from fractal_zeta.models import builtin_model
from fractal_zeta.oracle import cluster, dense_spectrum

DIAMOND = builtin_model("diamond")
SG = builtin_model("sg")
DSG = builtin_model("double-sg")
L2, L3, L5 = sympy.log(2), sympy.log(3), sympy.log(5)


def pz(rmap, w, s, **kw):
    return Z.poly_zeta(rmap, w, s, **kw).value


@pytest.mark.parametrize("w", [-1, -2, Fraction(-7, 3)])
@pytest.mark.parametrize("s", [1.5, 2, 2 + 1j])
def test_depth_zero(w, s):
    got = pz(DIAMOND.map, w, s, depth=0)
    assert abs(got - cmath.exp(-s * math.log(-float(w)))) < 1e-14


def test_diamond_identities_at_depth_20():
    R = DIAMOND.map
    a = pz(R, -1, 2, depth=20)
    assert abs(a - 4 ** 2 * pz(R, -2, 2, depth=20)) <= 1e-8 * abs(a)
    b = pz(R, -2, 2, depth=20)
    assert abs(b - (4 ** 2 - 1) * pz(R, 0, 2, depth=20)) <= 1e-8 * abs(b)


@pytest.mark.parametrize("s", [1.5, 2, 2.5, 3, 2 + 1j])
def test_double_pq_identities(s):
    for p in (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)):
        R = builtin_model("pq", p).map
        q = 1 - p
        u = cmath.exp(s * math.log(float(R.lam)))
        kw = dict(mode="multiset" if p == q else "set", tolerance=1e-10)
        lhs = pz(R, -2 - 2 * q, s, **kw) + pz(R, -2 - 2 * p, s, **kw)
        rhs = (u - 1) * pz(R, 0, s, **kw)
        assert abs(lhs - rhs) <= 1e-6 * abs(rhs)
        lhs = pz(R, -2 + 2 * q, s, **kw) + pz(R, -2 + 2 * p, s, **kw)
        rhs = (u - 1) * pz(R, -4, s, **kw)
        assert abs(lhs - rhs) <= 1e-6 * abs(rhs)


def test_series_converges_and_reports():
    r = Z.poly_zeta(SG.map, -3, 2)
    assert r.converged and r.tail_bound <= Z.DEFAULT_TOL
    assert 0 < r.depth <= 40


def test_cap_returns_unconverged():
    r = Z.poly_zeta(DIAMOND.map, -1, 1.6, depth=40, cap=2 ** 8)
    assert not r.converged and r.depth <= 8


def test_margin_error():
    sigma = Z.divergence_abscissa(DIAMOND.map)
    assert abs(sigma - 0.5) < 1e-15
    with pytest.raises(ValueError):
        Z.poly_zeta(DIAMOND.map, -1, 0.52)
    with pytest.raises(ValueError):
        Z.poly_zeta(DIAMOND.map, 1, 2)


def test_mp_route_agrees_with_float():
    for spec, w in ((DIAMOND, -1), (SG, -5), (builtin_model("pq", "3/10"), -4)):
        a = Z.poly_zeta(spec.map, w, 2.5, depth=6, stop_early=False)
        b = Z.poly_zeta(spec.map, w, 2.5, depth=6, stop_early=False, precision=40)
        assert abs(a.value - b.value) <= 1e-12 * abs(b.value)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 6), st.floats(-1.9, -0.1), st.floats(1.2, 4.0))
def test_finite_depth_is_a_preimage_sum(k, w, s):
    # the depth-k partial sum equals a direct sum over the preimage set
    R = DIAMOND.map
    got = Z.poly_zeta(R, w, s, depth=k, stop_early=False).value
    pts = preimage_set(R, w, k)
    want = sum((-(4 ** k) * float(z)) ** (-s) for z in pts)
    assert abs(got - want) <= 1e-11 * abs(want)


def test_closed_values_at_zero():
    assert Z.poly_zeta_at0(DIAMOND.map, 0) == (1, L2)
    v, d = Z.poly_zeta_at0(SG.map, -3)
    assert v == 0 and sympy.simplify(d - L3) == 0
    for p in (Fraction(3, 10), Fraction(1, 2)):
        R = builtin_model("pq", p).map
        pq = sympy.Rational(p.numerator, p.denominator) * (1 - sympy.Rational(p.numerator, p.denominator))
        v, d = Z.poly_zeta_at0(R, -4)
        assert v == 0 and sympy.simplify(d - (sympy.log(1 / (4 * pq)) / 2 + sympy.log(4))) == 0
    with pytest.raises(ValueError):
        Z.poly_zeta_at0(DIAMOND.map, 1)


def test_regularized_dets():
    rd = Z.regularized_det(DIAMOND)
    assert sympy.simplify(rd.closed_form - 2 ** sympy.Rational(-10, 9)) == 0
    assert rd.power_string() == "2^(-10/9)"
    assert abs(float(rd) - 0.462937) < 1e-6
    rd = Z.regularized_det(DSG)
    assert sympy.simplify(rd.closed_form - sympy.sqrt(sympy.Rational(5, 3)) / 2) == 0
    assert rd.decimal(12).startswith("0.645497224")
    for p in ("3/10", "1/2", "7/10"):
        pf = Fraction(p)
        rd = Z.regularized_det(builtin_model("double-pq", p))
        assert rd.closed_form == sympy.Rational(pf.numerator, pf.denominator) * (1 - sympy.Rational(pf.numerator, pf.denominator))
    assert Z.regularized_det(builtin_model("double-pq", "3/10")).decimal(5) == "0.21000"


def test_regularized_det_errors():
    with pytest.raises(ValueError):
        Z.regularized_det(SG)
    with pytest.raises(ValueError):
        Z.regularized_det(builtin_model("pq", "3/10"))


def test_published_forms_match_reduction():
    assert Z.published_form(DIAMOND).equals(Z.reduced_form(DIAMOND))
    assert Z.published_form(DSG, "combined").equals(Z.published_form(DSG, "total"))
    for p in ("3/10", "1/2", "7/10"):
        spec = builtin_model("double-pq", p)
        assert Z.published_form(spec).equals(Z.reduced_form(spec))


def test_combined_form_against_dirichlet_plus_neumann():
    comb = Z.evaluate_form(Z.published_form(DSG, "combined"), 2).value
    dn = (Z.evaluate_form(Z.published_form(DSG, "dirichlet"), 2).value
          + Z.evaluate_form(Z.published_form(DSG, "neumann"), 2).value)
    assert abs(comb - dn) <= 1e-10


def _births(form, mmax):
    x = sympy.Symbol("x")
    out = {}
    for t in form.terms:
        ser = sympy.series(t.coeff.subs(Z.U, 1 / x), x, 0, mmax + 1).removeO()
        out[t.w] = [int(ser.coeff(x, m)) for m in range(mmax + 1)]
    return out


@pytest.mark.parametrize("name,p,part,kind", [("sg", None, "dirichlet", "probabilistic"),
                                               ("sg", None, "neumann", "probabilistic"),
                                               ("pq", "3/10", "neumann", "pq-weighted")])
def test_component_forms_against_dense(name, p, part, kind):
    # expand the printed coefficient in 1/u into births per level and rebuild the spectrum
    spec = builtin_model(name, p)
    births = _births(Z.published_form(spec, part), 3)
    c = float(spec.scale(kind))
    fixed = [c * float(t.value) for t in spec.fixed_seeds()]
    for n in (1, 2, 3):
        g = build_graph(spec, n)
        m = laplacian(g, kind).nonnegative()
        if part == "dirichlet":
            m = m.restrict(interior(g))
        dense = [(round(v, 8), k) for v, k in cluster(dense_spectrum(m))
                 if abs(v) > 1e-9 and min(abs(v - f) for f in fixed) > 1e-9]
        pred = []
        for w, bs in births.items():
            for lvl in range(1, n + 1):
                pred += [c * float(z) for z in preimage_set(spec.map, w, n - lvl)] * bs[lvl]
        assert dense == [(round(v, 8), k) for v, k in cluster(sorted(pred))]


@pytest.mark.parametrize("p", ["3/10", "1/2", "7/10"])
def test_double_pq_zeta_is_two_poly_zetas(p):
    spec = builtin_model("double-pq", p)
    R = spec.map
    mode = "multiset" if Fraction(p) == Fraction(1, 2) else "set"
    for s in (2, 2.5 + 0.5j):
        want = pz(R, 0, s, mode=mode) + pz(R, -4, s, mode=mode)
        assert abs(Z.spectral_zeta(spec, s) - want) <= 1e-10 * abs(want)


def test_diamond_against_truncated_sum():
    closed = Z.spectral_zeta(DIAMOND, 2)
    trunc = Z.truncated_sum(DIAMOND, 2, 12)
    assert abs(closed - trunc) <= 1e-6


@pytest.mark.parametrize("spec", [DIAMOND, DSG, builtin_model("double-pq", "1/2"),
                                  builtin_model("double-pq", "3/10")], ids=lambda s: s.label())
@pytest.mark.parametrize("s", [2, 3])
def test_closed_form_vs_truncated(spec, s):
    level = {"diamond": 10, "double-sg": 8, "double-pq": 8}[spec.name]
    cf = Z.spectral_zeta_series(spec, s)
    tr = Z.spectral_zeta_truncated(spec, s, level)
    assert abs(cf.value - tr.value) <= cf.tail_bound + tr.tail_bound + 1e-12


def test_cycle_zeta_at_two():
    # rescaled eigenvalues tend to pi^2 k^2, each twice, so the value is 2 zeta_R(4) / pi^4
    assert abs(Z.spectral_zeta(builtin_model("double-pq", "1/2"), 2) - 1 / 45) < 1e-12


def test_pole_at_geometric_factor():
    with pytest.raises((ValueError, ZeroDivisionError)):
        Z.eval_coefficient(Z.published_form(DIAMOND).terms[0].coeff, 4)


def test_poles_diamond():
    ps = Z.complex_dimensions(DIAMOND)
    assert ps.real_parts() == [1]
    assert sympy.simplify(ps.lines[0].spacing - sympy.pi / L2) == 0
    assert not ps.has_imaginary_axis_line()


def test_poles_double_sg():
    ps = Z.complex_dimensions(DSG)
    assert [sympy.simplify(r - L3 / L5) for r in ps.real_parts()] == [0]
    assert abs(float(ps.real_parts()[0]) - 0.6826) < 1e-4
    assert not ps.has_imaginary_axis_line()


@pytest.mark.parametrize("p", ["3/10", "1/2"])
def test_poles_double_pq(p):
    spec = builtin_model("double-pq", p)
    ps = Z.complex_dimensions(spec)
    lam = sympy.Rational(spec.map.lam.numerator, spec.map.lam.denominator)
    assert [sympy.simplify(r - L3 / sympy.log(lam)) for r in ps.real_parts()] == [0]
    assert any(c.real_part == 0 for c in ps.cancelled)
    assert not ps.has_imaginary_axis_line()
    assert ps.to_dict()["model"] == spec.label()


def test_sg_keeps_imaginary_axis_candidates():
    assert not Z.complex_dimensions(SG).reduced


def test_mellin_examples():
    lhs, rhs, diff = Z.mellin_check([1], 1)
    assert abs(lhs - 1) < 1e-25 and diff <= 1e-8
    _, _, diff = Z.mellin_check(spectrum(builtin_model("double-pq", "1/2"), 2), 2)
    assert diff <= 1e-8
    _, _, diff = Z.mellin_check(spectrum(DSG, 1), 1.5)
    assert diff <= 1e-8
    with pytest.raises(ValueError):
        Z.mellin_check([1, 2], 0)


@pytest.mark.parametrize("n,expected", [(0, 4), (1, 36), (3, 2916)])
def test_cosine_product(n, expected):
    prod, want = Z.cosine_product_check(n)
    assert want == expected
    assert abs(prod - want) <= 1e-9 * want


def test_cosine_product_all_levels():
    for n in range(0, 11):
        prod, want = Z.cosine_product_check(n)
        assert want == 4 * 9 ** n
        assert abs(prod / want - 1) <= 1e-9
    with pytest.raises(ValueError):
        Z.cosine_product_check(11)
