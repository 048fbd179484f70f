from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fractal_zeta.determinants import (FactoredReal, closed_form_det, closed_form_trees, complexity_constant,
                                       det_expansion, discrete_det, expansion_residual, log_vector,
                                       printed_expansion, spanning_trees, spanning_trees_factored)
from fractal_zeta.graphs import build_graph, laplacian
from fractal_zeta.models import builtin_model
from fractal_zeta.oracle import matrix_tree_count, pseudo_det

ALL = [builtin_model(n) for n in ("diamond", "sg", "double-sg")] + \
      [builtin_model(n, p) for n in ("pq", "double-pq") for p in ("3/10", "1/2", "7/10")]


def test_double_sg_level1():
    fr = discrete_det(builtin_model("double-sg"), 1, "combinatorial")
    assert fr.to_fraction() == 97200
    assert str(fr.to_primes()) == "2^4 * 3^5 * 5^2"


def test_diamond_closed_form():
    spec = builtin_model("diamond")
    for n in range(0, 11):
        e = Fraction(-(2 * 4 ** n - 6 * n - 11), 9)
        assert discrete_det(spec, n, "probabilistic").to_fraction() == Fraction(2) ** int(e)


@pytest.mark.parametrize("p", ["3/10", "1/2", "7/10"])
def test_double_pq_closed_form(p):
    spec = builtin_model("double-pq", p)
    p = Fraction(p)
    q = 1 - p
    for n in range(1, 8):
        want = Fraction(2) ** (2 * 3 ** n) * (1 - q * q) ** n * (1 - p * p) ** n * (p * q) ** (3 ** n - 2 * n - 1)
        assert discrete_det(spec, n).to_fraction() == want
        assert closed_form_det(spec, n).to_fraction() == want


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.label())
def test_matches_pseudo_det(spec):
    for kind in spec.kinds():
        for n in (1, 2, 3):
            m = laplacian(build_graph(spec, n), kind).nonnegative()
            assert discrete_det(spec, n, kind).to_fraction() == pseudo_det(m), (kind, n)


def test_double_sg_closed_form_to_level_10():
    spec = builtin_model("double-sg")
    for n in range(1, 11):
        assert discrete_det(spec, n, "combinatorial") == closed_form_det(spec, n)


def test_trees_double_sg():
    spec = builtin_model("double-sg")
    assert spanning_trees(spec, 1) == 10800 == matrix_tree_count(build_graph(spec, 1))
    for n in range(1, 7):
        a = spanning_trees(spec, n, "laplacian")
        assert a == spanning_trees(spec, n, "degrees") == closed_form_trees(spec, n)
    assert str(spanning_trees_factored(spec, 2)) == "2^10 * 3^11 * 5^6"


def test_trees_cycle():
    spec = builtin_model("double-pq", Fraction(1, 2))
    for n in range(1, 7):
        assert spanning_trees(spec, n) == 2 * 3 ** n
    assert matrix_tree_count(build_graph(spec, 1)) == 6


@pytest.mark.parametrize("name", ["diamond", "sg"])
def test_trees_match_cofactor(name):
    spec = builtin_model(name)
    for n in (1, 2, 3):
        g = build_graph(spec, n)
        assert spanning_trees(spec, n) == matrix_tree_count(g) == matrix_tree_count(g, deleted=len(g.degrees) - 1)


def test_weighted_trees_raise():
    with pytest.raises(ValueError):
        spanning_trees(builtin_model("double-pq", Fraction(3, 10)), 2)
    with pytest.raises(ValueError):
        complexity_constant(builtin_model("pq", Fraction(7, 10)))


def test_complexity_constants():
    sg = complexity_constant(builtin_model("double-sg"))
    assert sympy.simplify(sg.closed_form - (sympy.log(2) / 3 + sympy.log(3) / 2 + sympy.log(5) / 6)) == 0
    assert abs(sg.value - 1.0486) < 1e-4
    assert abs(float(sg.table[-1][1]) - sg.value) < 1e-3
    dm = complexity_constant(builtin_model("diamond"))
    assert dm.closed_form == sympy.log(2)
    assert abs(float(dm.table[-1][1]) - dm.value) < 1e-2


def test_expansion_cycle():
    fit = det_expansion(builtin_model("double-pq", Fraction(1, 2)))
    assert fit.per_vertex == 0
    assert log_vector(fit.per_level) == log_vector(sympy.log(9))
    assert log_vector(fit.constant) == log_vector(sympy.log(4))


def test_expansion_double_sg():
    spec = builtin_model("double-sg")
    fit = det_expansion(spec)
    a, b, ldet = printed_expansion(spec)
    assert log_vector(fit.per_vertex) == log_vector(a)
    assert log_vector(fit.per_level) == log_vector(b)
    assert log_vector(fit.constant) == log_vector(-ldet)
    # log2 + log3/2 - log5/2
    assert abs(float(fit.values()[2]) - 0.43773) < 1e-5
    for n in range(1, 11):
        assert abs(expansion_residual(spec, fit, n)) <= 1e-12


@pytest.mark.parametrize("p", ["3/10", "7/10"])
def test_expansion_double_pq(p):
    spec = builtin_model("double-pq", p)
    fit = det_expansion(spec)
    a, b, ldet = printed_expansion(spec)
    assert log_vector(fit.per_vertex) == log_vector(a)
    assert log_vector(fit.per_level) == log_vector(b)
    assert log_vector(fit.constant) == log_vector(-ldet)
    assert abs(expansion_residual(spec, fit, 7)) <= 1e-12


def test_expansion_not_for_diamond():
    with pytest.raises(ValueError):
        det_expansion(builtin_model("diamond"))


def test_diamond_level_invariant():
    spec = builtin_model("diamond")
    logdet = -sympy.Rational(10, 9) * sympy.log(2)
    for n in range(0, 11):
        lhs = discrete_det(spec, n, "probabilistic").log(40)
        rhs = sympy.N(sympy.Rational(2 * 4 ** n - 6 * n - 11, 10) * logdet, 40)
        with mpmath.workdps(40):
            assert abs(lhs - mpmath.mpf(str(rhs))) < mpmath.mpf(10) ** -30


_small = st.fractions(min_value=Fraction(1, 30), max_value=50, max_denominator=30)


@settings(max_examples=40, deadline=None)
@given(_small, _small, st.integers(-4, 4), st.integers(-4, 4))
def test_factored_arithmetic(x, y, i, j):
    a = FactoredReal.make({x: i})
    b = FactoredReal.make({y: j})
    assert (a * b).to_fraction() == x ** i * y ** j
    assert (a / b).to_fraction() == x ** i / y ** j
    assert (a ** 3).to_fraction() == x ** (3 * i)
    assert (a * b).to_primes() == (a * b)
    with mpmath.workdps(30):
        assert abs((a * b).log(30) - mpmath.log(mpmath.mpf(x.numerator) / x.denominator) * i
                   - mpmath.log(mpmath.mpf(y.numerator) / y.denominator) * j) < mpmath.mpf(10) ** -25
