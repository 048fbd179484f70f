"""Level-n approximating graphs and their Laplacian matrices (exact entries).

Vertices are address words: ``(i_1, ..., i_n, b)`` names boundary point ``b``
of the cell ``F_{i_1} o ... o F_{i_n}``.  Points shared by neighbouring cells
are identified through a union-find on these words, and the lexicographically
smallest word represents the class.  The double models prefix every word
with a copy index 0/1 and identify the two copies along the boundary.
"""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .models import ModelSpec, fraction_str

DEFAULT_LEVEL_CAP = 12


@dataclass(frozen=True)
class CellStructure:
    """Combinatorial self-similar structure: ``m`` cells, ``b`` boundary points,
    level-0 edges between boundary points, and the gluing of level-1 cells."""

    m: int
    b: int
    g0: tuple
    glue: tuple  # ((cell, point), (cell, point)) pairs identified in V_1
    boundary: tuple  # (cell, point) representing each boundary point at level 1


DIAMOND = CellStructure(
    m=4, b=2, g0=((0, 1),),
    glue=(((0, 0), (2, 0)), ((0, 1), (1, 0)), ((1, 1), (3, 1)), ((2, 1), (3, 0))),
    boundary=((0, 0), (1, 1)),
)
GASKET = CellStructure(
    m=3, b=3, g0=((0, 1), (0, 2), (1, 2)),
    glue=(((0, 1), (1, 0)), ((0, 2), (2, 0)), ((1, 2), (2, 1))),
    boundary=((0, 0), (1, 1), (2, 2)),
)
INTERVAL3 = CellStructure(
    m=3, b=2, g0=((0, 1),),
    glue=(((0, 1), (1, 0)), ((1, 1), (2, 0))),
    boundary=((0, 0), (2, 1)),
)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            if b < a:
                a, b = b, a
            self.parent[b] = a


def _self_similar(cs: CellStructure, n: int, letter_weights=None):
    verts = [(a,) for a in range(cs.b)]
    edges = {((u,), (v,)): Fraction(1) for u, v in cs.g0}
    bd = [(a,) for a in range(cs.b)]
    for _ in range(n):
        uf = _UnionFind()
        for i in range(cs.m):
            for v in verts:
                uf.find((i,) + v)
        for (i, a), (j, c) in cs.glue:
            uf.union((i,) + bd[a], (j,) + bd[c])
        new_edges = defaultdict(Fraction)
        for i in range(cs.m):
            w = letter_weights[i] if letter_weights else 1
            for (u, v), wt in edges.items():
                x, y = uf.find((i,) + u), uf.find((i,) + v)
                if y < x:
                    x, y = y, x
                new_edges[(x, y)] += wt * w
        verts = sorted({uf.find((i,) + v) for i in range(cs.m) for v in verts})
        bd = [uf.find((i,) + bd[a]) for i, a in cs.boundary]
        edges = dict(new_edges)
    return verts, edges, bd


def _double(verts, edges, bd):
    uf = _UnionFind()
    for c in (0, 1):
        for v in verts:
            uf.find((c,) + v)
    for x in bd:
        uf.union((0,) + x, (1,) + x)
    new_edges = defaultdict(Fraction)
    for c in (0, 1):
        for (u, v), w in edges.items():
            x, y = uf.find((c,) + u), uf.find((c,) + v)
            if y < x:
                x, y = y, x
            new_edges[(x, y)] += w
    new_verts = sorted({uf.find((c,) + v) for c in (0, 1) for v in verts})
    new_bd = [uf.find((0,) + x) for x in bd]
    return new_verts, dict(new_edges), new_bd


def _label(word, doubled):
    if doubled:
        copy, word = word[0], word[1:]
        prefix = "ab"[copy] + "|"
    else:
        prefix = ""
    letters = "".join(str(i + 1) for i in word[:-1])
    return f"{prefix}{letters}:{word[-1]}"


@dataclass(frozen=True)
class LevelGraph:
    model: str
    level: int
    vertices: tuple  # labels
    edges: tuple  # (i, j, weight) with i < j
    degrees: tuple  # weighted degrees
    boundary: tuple  # vertex indices of the boundary points (empty for doubles)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def neighbours(self):
        nb = [[] for _ in self.vertices]
        for i, j, w in self.edges:
            nb[i].append((j, w))
            nb[j].append((i, w))
        return nb

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        nb = self.neighbours()
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u, _ in nb[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def is_unweighted(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    def edge_count(self) -> int:
        return len(self.edges)


def _structure(spec: ModelSpec):
    base = spec.name.replace("double-", "")
    doubled = spec.name.startswith("double-")
    if base == "diamond":
        return DIAMOND, None, doubled
    if base == "sg":
        return GASKET, None, doubled
    if base == "pq":
        p, q = spec.p, spec.q
        return INTERVAL3, (2 * q, 2 * p, 2 * q), doubled
    raise ValueError(f"no graph construction for model {spec.name!r}")


def build_graph(spec: ModelSpec, n: int, cap: int = DEFAULT_LEVEL_CAP) -> LevelGraph:
    if n < 0:
        raise ValueError("level must be nonnegative")
    if n > cap:
        raise ValueError(f"level cap exceeded: {n} > {cap}")
    cs, weights, doubled = _structure(spec)
    verts, edges, bd = _self_similar(cs, n, weights)
    if doubled:
        verts, edges, bd = _double(verts, edges, bd)
    index = {v: k for k, v in enumerate(verts)}
    edge_list = []
    deg = [Fraction(0)] * len(verts)
    for (x, y), w in sorted(edges.items()):
        i, j = index[x], index[y]
        if i == j:
            raise AssertionError("self-loop produced by gluing")
        if j < i:
            i, j = j, i
        edge_list.append((i, j, w))
        deg[i] += w
        deg[j] += w
    edge_list.sort()
    return LevelGraph(
        model=spec.name,
        level=n,
        vertices=tuple(_label(v, doubled) for v in verts),
        edges=tuple(edge_list),
        degrees=tuple(deg),
        boundary=() if doubled else tuple(index[x] for x in bd),
    )


def vertex_count(spec: ModelSpec, n: int) -> int:
    if n < 0:
        raise ValueError("level must be nonnegative")
    return spec.vertex_count(n)


@dataclass(frozen=True)
class LaplacianMatrix:
    kind: str
    size: int
    rows: tuple  # tuple of dicts col -> Fraction

    def entry(self, i, j) -> Fraction:
        return self.rows[i].get(j, Fraction(0))

    def to_dense(self) -> list:
        out = [[Fraction(0)] * self.size for _ in range(self.size)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                out[i][j] = v
        return out

    def row_sums(self) -> list:
        return [sum(r.values(), Fraction(0)) for r in self.rows]

    def is_symmetric(self) -> bool:
        return all(self.entry(j, i) == v for i, r in enumerate(self.rows) for j, v in r.items())

    def scaled(self, c) -> "LaplacianMatrix":
        c = Fraction(c)
        return LaplacianMatrix(self.kind, self.size,
                               tuple({j: c * v for j, v in r.items()} for r in self.rows))

    @property
    def sign(self) -> int:
        """+1 if the matrix is positive semidefinite-like, -1 for the
        negative semidefinite pq-weighted operator."""
        return -1 if self.kind == "pq-weighted" else 1

    def nonnegative(self) -> "LaplacianMatrix":
        return self if self.sign > 0 else self.scaled(-1)

    def restrict(self, keep) -> "LaplacianMatrix":
        """Principal submatrix on the index list ``keep``."""
        keep = list(keep)
        pos = {k: a for a, k in enumerate(keep)}
        rows = []
        for k in keep:
            rows.append({pos[j]: v for j, v in self.rows[k].items() if j in pos})
        return LaplacianMatrix(self.kind, len(keep), tuple(rows))


def laplacian(graph: LevelGraph, kind: str = "combinatorial") -> LaplacianMatrix:
    """combinatorial D - A, probabilistic I - D^-1 A, or the pq-weighted
    generator -2 (I - D^-1 A) whose off-diagonal entries are 2p, 2q."""
    nb = graph.neighbours()
    rows = []
    for i, deg in enumerate(graph.degrees):
        row = defaultdict(Fraction)
        if kind == "combinatorial":
            row[i] += deg
            for j, w in nb[i]:
                row[j] -= w
        elif kind in ("probabilistic", "pq-weighted"):
            c = Fraction(1) if kind == "probabilistic" else Fraction(-2)
            row[i] += c
            for j, w in nb[i]:
                row[j] -= c * w / deg
        else:
            raise ValueError(f"unknown laplacian kind {kind!r}")
        rows.append({j: v for j, v in sorted(row.items()) if v != 0})
    return LaplacianMatrix(kind, graph.size, tuple(rows))


def interior(graph: LevelGraph) -> list:
    """Vertex indices off the boundary (all vertices for the double models)."""
    bd = set(graph.boundary)
    return [i for i in range(graph.size) if i not in bd]


def edges_csv(graph: LevelGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "weight"])
    for i, j, wt in graph.edges:
        w.writerow([graph.vertices[i], graph.vertices[j], fraction_str(wt)])
    return buf.getvalue()


def graph_dict(graph: LevelGraph) -> dict:
    return {
        "model": graph.model,
        "level": graph.level,
        "vertices": list(graph.vertices),
        "edges": [[graph.vertices[i], graph.vertices[j], fraction_str(w)] for i, j, w in graph.edges],
    }


def graph_json(graph: LevelGraph) -> str:
    return json.dumps(dict(schema=1, **graph_dict(graph)), indent=2)


def matrix_coordinate_text(mat: LaplacianMatrix) -> str:
    lines = [f"% kind={mat.kind} size={mat.size}"]
    for i, row in enumerate(mat.rows):
        for j, v in sorted(row.items()):
            lines.append(f"{i} {j} {fraction_str(v)}")
    return "\n".join(lines) + "\n"
