import json
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fractal_zeta.models import (MODEL_NAMES, ExpPoly, ModelSpec, RationalMap, builtin_model,
                                 catalog_json, spec_from_dict, validate_spec)
from fractal_zeta.graphs import build_graph, laplacian
from fractal_zeta.oracle import cluster, dense_spectrum

ALL = [builtin_model(n) for n in ("diamond", "sg", "double-sg")] + \
      [builtin_model(n, p) for n in ("pq", "double-pq") for p in ("3/10", "1/2", "7/10")]


def test_diamond_map():
    d = builtin_model("diamond")
    assert d.map.lam == 4 and d.map.degree == 2 and d.map.leading_coeff == 2
    assert d.map(Fraction(-1)) == -2


def test_double_pq_lambda_at_half():
    assert builtin_model("double-pq", Fraction(1, 2)).map.lam == 9


def test_pq_lambda_formula():
    for p in (Fraction(3, 10), Fraction(2, 3)):
        assert builtin_model("pq", p).map.lam == 1 + 2 / (p * (1 - p))


def test_double_sg_seed_minus5():
    spec = builtin_model("double-sg")
    seed = next(s for s in spec.seeds if s.value == -5)
    assert [seed.multiplicity(n) for n in range(1, 6)] == [3 ** (n - 1) + 1 for n in range(1, 6)]
    assert seed.multiplicity(0) == 0


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.label())
def test_builtins_validate(spec):
    assert validate_spec(spec) == []


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.label())
def test_total_multiplicity_is_vertex_count(spec):
    for n in range(1, 5):
        assert spec.total_multiplicity(n) == spec.vertex_count(n)


def test_lambda_matches_symbolic_derivative():
    z = sympy.Symbol("z")
    for spec in ALL:
        lam = sympy.diff(spec.map.sympy_expr(z), z).subs(z, 0)
        assert lam == sympy.Rational(spec.map.lam.numerator, spec.map.lam.denominator)


def test_pq_spectral_dimension():
    for p in (Fraction(3, 10), Fraction(7, 10)):
        spec = builtin_model("pq", p)
        assert abs(spec.spectral_dimension - math.log(9) / math.log(1 + 2 / float(p * (1 - p)))) < 1e-12


def test_lambda_one_diagnostic():
    d = builtin_model("diamond")
    bad = ModelSpec(**{**d.__dict__, "map": RationalMap((0, 1, 2))})
    assert any("λ must exceed 1" in m for m in validate_spec(bad))


def test_p_out_of_range_diagnostic():
    spec = builtin_model("pq", Fraction(3, 10))
    bad = ModelSpec(**{**spec.__dict__, "p": Fraction(0)})
    assert any("p out of range" in m for m in validate_spec(bad))


def test_errors():
    with pytest.raises(ValueError):
        builtin_model("koch")
    with pytest.raises(ValueError):
        builtin_model("pq")
    with pytest.raises(ValueError):
        builtin_model("pq", Fraction(3, 2))
    with pytest.raises(ValueError):
        builtin_model("diamond", Fraction(1, 2))


def test_schedule_tables_agree_with_laws():
    for spec in ALL:
        for s in spec.seeds:
            assert s.schedule.table_matches_law(), (spec.label(), s.label)


def test_diamond_schedule_rederived_from_dense():
    # every eigenvalue 1 of the level-m probabilistic Laplacian is born at level m
    spec = builtin_model("diamond")
    seed = next(s for s in spec.primitive_seeds() if s.value == -1)
    for m in range(1, 5):
        spec_m = dict(cluster(dense_spectrum(laplacian(build_graph(spec, m), "probabilistic"))))
        mult = next(k for v, k in spec_m.items() if abs(v - 1) < 1e-8)
        assert mult == seed.multiplicity(m) == (4 ** m + 2) // 3


def test_double_pq_schedules_rederived_from_dense():
    for p in (Fraction(3, 10), Fraction(7, 10)):
        spec = builtin_model("double-pq", p)
        for m in range(1, 5):
            dense = cluster(dense_spectrum(laplacian(build_graph(spec, m), "pq-weighted").nonnegative()))
            for s in spec.primitive_seeds():
                target = float(spec.scale("pq-weighted") * s.value)
                got = sum(k for v, k in dense if abs(v - target) < 1e-8)
                assert got == s.multiplicity(m), (s.label, m)


def test_catalog_roundtrip():
    doc = json.loads(catalog_json())
    names = [m["name"] for m in doc["models"]]
    assert set(MODEL_NAMES) <= set(names)
    for entry in doc["models"]:
        spec = spec_from_dict(entry)
        orig = builtin_model(spec.name, spec.p)
        assert spec.map == orig.map
        assert [s.multiplicity(3) for s in spec.seeds] == [s.multiplicity(3) for s in orig.seeds]


def test_catalog_rationals_are_strings():
    doc = json.loads(catalog_json())
    pq = next(m for m in doc["models"] if m["name"] == "pq")
    assert all(isinstance(c, str) for c in pq["map"]["num"])
    assert isinstance(pq["map"]["lambda"], str) and isinstance(pq["params"]["p"], str)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(-3, 3), st.integers(2, 5), st.integers(0, 2))
def test_generating_function_matches_series(c, c2, r, start):
    law = ExpPoly(terms=((c, r), (c2, 1)), start=start)
    u = sympy.Symbol("u")
    g = law.generating_function(u)
    x = sympy.Symbol("x")
    ser = sympy.series(g.subs(u, 1 / x), x, 0, 6).removeO()
    for m in range(1, 6):
        assert ser.coeff(x, m) == (law(m) if m >= start else 0)


def test_exception_values():
    law = ExpPoly(terms=((1, 3),), start=0, exceptions=((0, 2),))
    assert law(0) == 2 and law(2) == 9
