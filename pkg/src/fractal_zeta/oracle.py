"""Brute-force verification kernel on explicit matrices.

Nothing here knows about spectral decimation: these routines only see the
matrices built by ``graphs`` and serve as the independent side of every
cross-check.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

CHAR_POLY_CAP = 4096


@dataclass(frozen=True)
class ExactMatrix:
    entries: tuple  # tuple of rows of Fractions

    @classmethod
    def from_rows(cls, rows) -> "ExactMatrix":
        rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        return cls(rows)

    @classmethod
    def from_laplacian(cls, lap) -> "ExactMatrix":
        return cls.from_rows(lap.to_dense())

    @property
    def size(self) -> int:
        return len(self.entries)

    def rows(self) -> list:
        return [list(r) for r in self.entries]

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries], dtype=float)

    def __neg__(self):
        return ExactMatrix(tuple(tuple(-x for x in r) for r in self.entries))


def _as_exact(m) -> ExactMatrix:
    if isinstance(m, ExactMatrix):
        return m
    if hasattr(m, "to_dense"):
        return ExactMatrix.from_laplacian(m)
    return ExactMatrix.from_rows(m)


def _hessenberg_charpoly(a: list) -> list:
    # similarity reduction to upper Hessenberg form, then the standard
    # determinant recurrence on the leading principal blocks
    n = len(a)
    h = [r[:] for r in a]
    for j in range(n - 2):
        piv = next((i for i in range(j + 1, n) if h[i][j] != 0), None)
        if piv is None:
            continue
        if piv != j + 1:
            h[piv], h[j + 1] = h[j + 1], h[piv]
            for r in h:
                r[piv], r[j + 1] = r[j + 1], r[piv]
        pv = h[j + 1][j]
        rp = h[j + 1]
        for i in range(j + 2, n):
            if h[i][j] == 0:
                continue
            t = h[i][j] / pv
            ri = h[i]
            for c in range(j, n):
                if rp[c]:
                    ri[c] -= t * rp[c]
            for r in h:
                if r[i]:
                    r[j + 1] += t * r[i]
    polys = [[Fraction(1)]]
    for k in range(n):
        prev = polys[-1]
        p = [Fraction(0)] + prev[:]
        for i, c in enumerate(prev):
            p[i] -= h[k][k] * c
        prod = Fraction(1)
        for i in range(k - 1, -1, -1):
            prod *= h[i + 1][i]
            if prod == 0:
                break
            coef = h[i][k] * prod
            if coef:
                for e, c in enumerate(polys[i]):
                    p[e] -= coef * c
        polys.append(p)
    return polys[-1]


def _matmul(a, b):
    n = len(a)
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)) for col in bt] for row in a]


def _faddeev_charpoly(a: list) -> list:
    # Faddeev-LeVerrier trace recursion: M_k = A M_{k-1} + c_{n-k+1} I
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        for i in range(n):
            m[i][i] += coeffs[n - k + 1]
        am = _matmul(a, m)
        tr = sum((am[i][i] for i in range(n)), Fraction(0))
        coeffs[n - k] = -tr / k
        m = am
    return coeffs


def char_poly(m, method: str = "hessenberg") -> list:
    """Ascending coefficients of det(xI - M)."""
    mat = _as_exact(m)
    n = mat.size
    if n > CHAR_POLY_CAP:
        raise ValueError(f"size cap exceeded: {n} > {CHAR_POLY_CAP}")
    if n == 0:
        return [Fraction(1)]
    if method == "hessenberg":
        return _hessenberg_charpoly(mat.rows())
    if method in ("faddeev", "trace"):
        return _faddeev_charpoly(mat.rows())
    raise ValueError(f"unknown method {method!r}")


def pseudo_det(m, coeffs=None) -> Fraction:
    """Product of the nonzero eigenvalues, assuming a one-dimensional kernel."""
    mat = _as_exact(m)
    c = char_poly(mat) if coeffs is None else coeffs
    if c[0] != 0 or len(c) < 2 or c[1] == 0:
        raise ValueError("kernel dimension differs from 1")
    n = mat.size
    return (-1) ** (n - 1) * c[1]


def bareiss_det(rows) -> Fraction:
    """Fraction-free determinant; exact for integer input, also works on Fractions."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return Fraction(1)
    scale = 1
    # clear denominators so that all divisions are exact integer divisions
    den = 1
    for r in a:
        for x in r:
            den = lcm(den, Fraction(x).denominator)
    if den != 1:
        a = [[int(Fraction(x) * den) for x in r] for r in a]
        scale = Fraction(1, den ** n)
    else:
        a = [[int(x) for x in r] for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if sw is None:
                return Fraction(0)
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            ri, rk = a[i], a[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1] * scale


def matrix_tree_count(g, deleted: int = 0) -> int:
    """Kirchhoff count: determinant of the combinatorial Laplacian with row and
    column ``deleted`` removed."""
    if not g.is_unweighted():
        raise ValueError("matrix-tree count needs an unweighted graph")
    n = g.size
    if not 0 <= deleted < n:
        raise IndexError("deleted vertex out of range")
    if not g.is_connected():
        raise ValueError("graph is disconnected")
    lap = [[0] * n for _ in range(n)]
    for i, j, w in g.edges:
        w = int(w)
        lap[i][j] -= w
        lap[j][i] -= w
        lap[i][i] += w
        lap[j][j] += w
    keep = [k for k in range(n) if k != deleted]
    minor = [[lap[i][j] for j in keep] for i in keep]
    val = bareiss_det(minor)
    if val.denominator != 1 or val <= 0:
        raise ArithmeticError(f"non-positive cofactor {val}")
    return int(val)


def stationary_weights(m) -> list:
    """Positive weights pi with pi_i M_ij = pi_j M_ji (detailed balance), found by
    propagating ratios along a BFS tree of the nonzero pattern."""
    mat = _as_exact(m)
    a = mat.entries
    n = mat.size
    pi = [None] * n
    for root in range(n):
        if pi[root] is not None:
            continue
        pi[root] = Fraction(1)
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if j == i or a[i][j] == 0:
                    continue
                if a[j][i] == 0 or (a[i][j] > 0) != (a[j][i] > 0):
                    raise ValueError("symmetrization unavailable: sign pattern not reversible")
                if pi[j] is None:
                    pi[j] = pi[i] * a[i][j] / a[j][i]
                    queue.append(j)
    for i in range(n):
        for j in range(n):
            if pi[i] * a[i][j] != pi[j] * a[j][i]:
                raise ValueError("symmetrization unavailable: detailed balance fails")
    return pi


def symmetrize(m) -> np.ndarray:
    """Float matrix D^{1/2} M D^{-1/2} with D = diag(pi); symmetric when M is reversible."""
    mat = _as_exact(m)
    pi = stationary_weights(mat)
    s = np.sqrt(np.array([float(x) for x in pi]))
    a = mat.to_float()
    out = (s[:, None] * a) / s[None, :]
    return (out + out.T) / 2


def dense_spectrum(m, tol: float = 1e-10) -> list:
    """All eigenvalues, ascending, via a symmetric eigensolver."""
    mat = _as_exact(m)
    if all(mat.entries[i][j] == mat.entries[j][i] for i in range(mat.size) for j in range(i)):
        a = mat.to_float()
    else:
        a = symmetrize(mat)
    vals = np.linalg.eigvalsh(a)
    return sorted(float(v) for v in vals)


def cluster(values, gap: float = 1e-6) -> list:
    """Group sorted values whose consecutive gaps are below ``gap``; returns
    (mean, multiplicity) pairs."""
    out = []
    for v in sorted(values):
        if out and v - out[-1][2] < gap:
            out[-1][0] += v
            out[-1][1] += 1
            out[-1][2] = v
        else:
            out.append([v, 1, v])
    return [(s / c, c) for s, c, _ in out]
