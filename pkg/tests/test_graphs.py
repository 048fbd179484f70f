import json
from fractions import Fraction

import pytest

from fractal_zeta.graphs import (build_graph, edges_csv, graph_json, interior, laplacian,
                                 matrix_coordinate_text, vertex_count)
from fractal_zeta.models import builtin_model

MODELS = [("diamond", None), ("sg", None), ("double-sg", None), ("pq", "3/10"), ("double-pq", "3/10"),
          ("double-pq", "1/2")]


def test_diamond_level1_is_a_4_cycle():
    g = build_graph(builtin_model("diamond"), 1)
    assert g.size == 4 and g.edge_count() == 4
    assert sorted(g.degrees) == [2, 2, 2, 2]


def test_double_sg_level1():
    g = build_graph(builtin_model("double-sg"), 1)
    assert g.size == 9 and g.edge_count() == 18
    assert set(g.degrees) == {4}
    assert 4 * 9 // 2 == g.edge_count()


def test_sg_level0_triangle():
    g = build_graph(builtin_model("sg"), 0)
    assert g.size == 3 and g.edge_count() == 3


def test_double_pq_is_cycle():
    for n in (1, 2, 3):
        g = build_graph(builtin_model("double-pq", Fraction(1, 2)), n)
        assert g.size == g.edge_count() == 2 * 3 ** n
        assert set(g.degrees) == {2}
        assert g.is_connected()


@pytest.mark.parametrize("name,p", MODELS)
def test_vertex_counts_match_law(name, p):
    spec = builtin_model(name, p)
    for n in range(0, 5):
        g = build_graph(spec, n)
        assert g.size == vertex_count(spec, n) == spec.vertex_count(n)
        assert g.is_connected()


def test_sg_vertex_law():
    spec = builtin_model("sg")
    assert [build_graph(spec, n).size for n in range(4)] == [(3 ** (n + 1) + 3) // 2 for n in range(4)]


def test_pq_weights():
    spec = builtin_model("pq", Fraction(3, 10))
    g = build_graph(spec, 1)
    assert sorted(w for _, _, w in g.edges) == sorted([Fraction(7, 5), Fraction(3, 5), Fraction(7, 5)])


@pytest.mark.parametrize("name,p", MODELS)
def test_laplacian_row_sums_and_symmetry(name, p):
    spec = builtin_model(name, p)
    g = build_graph(spec, 2)
    comb = laplacian(g, "combinatorial")
    assert all(s == 0 for s in comb.row_sums())
    assert comb.is_symmetric()
    for kind in ("probabilistic", "pq-weighted"):
        assert all(s == 0 for s in laplacian(g, kind).row_sums())


def test_pq_weighted_offdiagonals():
    spec = builtin_model("double-pq", Fraction(3, 10))
    g = build_graph(spec, 1)
    m = laplacian(g, "pq-weighted")
    offdiag = sorted({v for r in m.rows for j, v in r.items()} - {Fraction(-2)})
    # 2p and 2q inside cells; at a glued vertex both edges have weight q, giving 2 * 1/2
    assert offdiag == [Fraction(3, 5), Fraction(1), Fraction(7, 5)]
    assert m.nonnegative().sign == -1 and m.nonnegative().entry(0, 0) == 2


def test_level_cap():
    with pytest.raises(ValueError):
        build_graph(builtin_model("sg"), 13)
    with pytest.raises(ValueError):
        build_graph(builtin_model("sg"), -1)


def test_interior_of_sg():
    g = build_graph(builtin_model("sg"), 2)
    assert len(interior(g)) == g.size - 3
    assert len(interior(build_graph(builtin_model("double-sg"), 2))) == 27


def test_exports():
    g = build_graph(builtin_model("diamond"), 1)
    text = edges_csv(g)
    assert text.splitlines()[0] == "u,v,weight" and len(text.splitlines()) == 5
    doc = json.loads(graph_json(g))
    assert doc["schema"] == 1 and doc["level"] == 1 and len(doc["edges"]) == 4
    mtx = matrix_coordinate_text(laplacian(build_graph(builtin_model("pq", "3/10"), 1), "probabilistic"))
    assert "7/10" in mtx or "3/10" in mtx


def test_deterministic():
    spec = builtin_model("double-sg")
    assert graph_json(build_graph(spec, 2)) == graph_json(build_graph(spec, 2))
