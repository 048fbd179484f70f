"""Spectra by iterated preimages of the decimation map.

A level-n spectrum is assembled from the model's seeds: fixed seeds contribute
themselves with their tabulated multiplicity, and a primitive seed born at
level m contributes every depth-(n - m) preimage under R.  Values are kept
in decimation coordinates; ``SpectrumMultiset.sign_map`` converts them to
eigenvalues of a concrete Laplacian matrix.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .models import EigenvalueSeed, ModelSpec, RationalMap, fraction_str

PREIMAGE_CAP = 3 ** 15
PRECISION_ENV = "FRACTAL_ZETA_PRECISION"
DEEP_TREE_DPS = 64
MERGE_TOL = 1e-7


class PrecisionError(ArithmeticError):
    pass


def working_dps(depth: int = 0) -> int | None:
    """Decimal digits for a tree of the given depth; None means double precision."""
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            dps = int(env)
        except ValueError:
            raise ValueError(f"{PRECISION_ENV} must be an integer, got {env!r}")
        if dps < 15:
            raise ValueError(f"{PRECISION_ENV} must be at least 15")
        return dps
    return DEEP_TREE_DPS if depth > 8 else None


def _poly_eval(coeffs, z):
    acc = 0 * z
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def _to_num(x, dps):
    if dps is None:
        if isinstance(x, Fraction):
            return x.numerator / x.denominator
        return float(x)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _newton(coeffs, dcoeffs, z, dps, iters=60):
    eps = 1e-16 if dps is None else mpmath.mpf(10) ** (-dps + 2)
    for _ in range(iters):
        fp = _poly_eval(dcoeffs, z)
        if fp == 0:
            break
        dz = _poly_eval(coeffs, z) / fp
        z = z - dz
        if abs(dz) <= eps * max(abs(z), 1e-300 if dps is None else mpmath.mpf(10) ** (-10 * dps)):
            break
    return z


def _quadratic_roots(c0, c1, c2, dps):
    disc = c1 * c1 - 4 * c2 * c0
    scale = c1 * c1 + abs(4 * c2 * c0)
    tol = (1e-13 if dps is None else mpmath.mpf(10) ** (-dps + 5)) * scale
    if disc < -tol:
        return []
    if abs(disc) <= tol:
        return [(-c1 / (2 * c2), 2)]
    sq = mpmath.sqrt(disc) if dps is not None else float(np.sqrt(disc))
    q = -(c1 + sq) / 2 if c1 >= 0 else -(c1 - sq) / 2
    r1 = q / c2
    r2 = c0 / q if q != 0 else -r1
    return sorted([(r1, 1), (r2, 1)])


def real_roots(coeffs, dps=None) -> list:
    """Real roots of the polynomial with ascending ``coeffs`` as (value, multiplicity),
    ascending.  ``dps=None`` works in double precision, otherwise in mpmath."""
    cs = list(coeffs)
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    d = len(cs) - 1
    if d < 1:
        raise ValueError("constant polynomial has no roots")
    ctx = mpmath.workdps(dps) if dps is not None else _NullCtx()
    with ctx:
        num = [_to_num(c, dps) for c in cs]
        if d == 1:
            return [(-num[0] / num[1], 1)]
        if d == 2:
            return _quadratic_roots(num[0], num[1], num[2], dps)
        if d > 3:
            raise ValueError("degree above 3 is not supported")
        dnum = _deriv(num)
        fl = [float(c) for c in cs]
        guesses = np.roots(fl[::-1])
        cand = []
        for g in guesses:
            if abs(g.imag) <= 1e-5 * max(1.0, abs(g.real)):
                cand.append(g.real)
        cand.sort()
        # merge near-coincident guesses into clusters
        clusters = []
        for g in cand:
            if clusters and abs(g - clusters[-1][-1]) <= 1e-5 * max(1.0, abs(g)):
                clusters[-1].append(g)
            else:
                clusters.append([g])
        out = []
        total = 0
        for cl in clusters:
            z0 = _to_num(sum(cl) / len(cl), dps)
            if len(cl) == 1:
                z = _newton(num, dnum, z0, dps)
                out.append((z, 1))
            else:
                # a double (or triple) root is a root of the derivative too
                z = _newton(dnum, _deriv(dnum), z0, dps)
                out.append((z, len(cl)))
            total += len(cl)
        scalefn = lambda z: sum(abs(c) * abs(z) ** i for i, c in enumerate(num))
        good = []
        for z, mlt in out:
            r = abs(_poly_eval(num, z))
            lim = (1e-12 if dps is None else mpmath.mpf(10) ** (-dps + 8)) * scalefn(z)
            if mlt > 1:
                lim = (1e-7 if dps is None else mpmath.mpf(10) ** (-(dps // 2) + 4)) * scalefn(z)
            if r <= lim:
                good.append((z, mlt))
        good.sort(key=lambda t: t[0])
        return good


class _NullCtx:
    def __enter__(self):
        return self

    def __exit__(self, *a):
        return False


def _check_residual(rmap: RationalMap, z, w, dps):
    with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
        zz = z if dps is not None else float(z)
        res = abs(rmap(zz) - _to_num(Fraction(w) if isinstance(w, (int, Fraction)) else w, dps))
        bound = 1e-12 * max(1.0, abs(float(w)))
        if res > bound:
            raise PrecisionError(f"|R(z) - w| = {float(res):.3e} exceeds {bound:.1e} at z = {float(z)}")


def preimages(rmap: RationalMap, w, precision=None, with_multiplicity=False):
    """Real solutions of R(z) = w in ascending order."""
    if rmap.degree > 3:
        raise ValueError("maps of degree above 3 are not supported")
    dps = precision
    with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
        if isinstance(w, (int, Fraction)):
            coeffs = rmap.preimage_polynomial(Fraction(w))
        else:
            num = [_to_num(c, dps) for c in rmap.numerator_coeffs]
            den = [_to_num(c, dps) for c in rmap.denominator_coeffs]
            den += [0] * (len(num) - len(den))
            coeffs = [a - w * b for a, b in zip(num, den)]
        roots = real_roots(coeffs, dps)
        for z, _ in roots:
            _check_residual(rmap, z, w, dps)
    if with_multiplicity:
        return roots
    return [z for z, _ in roots]


def _dedupe(values, tol=MERGE_TOL):
    out = []
    for v in sorted(values):
        if out and abs(v - out[-1]) <= tol * max(1.0, abs(float(v))):
            continue
        out.append(v)
    return out


def preimage_set(rmap: RationalMap, w, k: int, precision=None, cap: int = PREIMAGE_CAP) -> list:
    """All distinct real depth-k preimages of w, ascending."""
    if k < 0:
        raise ValueError("depth must be nonnegative")
    if rmap.degree ** k > cap:
        raise ValueError(f"preimage cap exceeded: {rmap.degree}^{k} > {cap}")
    dps = precision if precision is not None else working_dps(k)
    with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
        level = [_to_num(Fraction(w), dps) if isinstance(w, (int, Fraction)) else w]
        for _ in range(k):
            nxt = []
            for x in level:
                nxt.extend(preimages(rmap, x, dps))
            level = _dedupe(nxt)
        return level


@dataclass(frozen=True)
class Node:
    value: object
    branch: int
    multiplicity: int
    parent: int


def preimage_tree(rmap: RationalMap, w, depth: int, dps=None) -> list:
    """Levels 0..depth of the preimage tree of w; each node keeps its branch index
    among the roots of R(z) = parent and its root multiplicity (cumulative)."""
    start = _to_num(Fraction(w), dps) if isinstance(w, (int, Fraction)) else w
    levels = [[Node(start, 0, 1, -1)]]
    with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
        for _ in range(depth):
            nxt = []
            for idx, node in enumerate(levels[-1]):
                for b, (z, mlt) in enumerate(preimages(rmap, node.value, dps, with_multiplicity=True)):
                    nxt.append(Node(z, b, node.multiplicity * mlt, idx))
            levels.append(nxt)
    return levels


@dataclass(frozen=True)
class SignMap:
    """matrix eigenvalue = scale * (decimation coordinate)"""

    kind: str
    scale: Fraction

    def __call__(self, z):
        if isinstance(z, (int, Fraction)):
            return self.scale * z
        return float(self.scale) * z if isinstance(z, float) else mpmath.mpf(self.scale.numerator) / self.scale.denominator * z

    def inverse(self, x):
        return x / float(self.scale)


@dataclass(frozen=True)
class LabeledEigenvalue:
    value: object
    seed: EigenvalueSeed
    depth: int
    branch: int
    multiplicity: int
    birth_level: int


@dataclass
class SpectrumMultiset:
    level: int
    entries: list
    sign_map: SignMap
    model: str = ""
    lam: Fraction = Fraction(1)

    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def matrix_values(self) -> list:
        """Expanded, ascending float matrix eigenvalues."""
        out = []
        for e in self.entries:
            out.extend([float(self.sign_map(e.value))] * e.multiplicity)
        return sorted(out)

    def clusters(self, gap: float = 1e-6) -> list:
        pairs = sorted((float(self.sign_map(e.value)), e.multiplicity) for e in self.entries)
        out = []
        for v, m in pairs:
            if out and v - out[-1][2] < gap:
                out[-1][1] += m
                out[-1][2] = v
            else:
                out.append([v, m, v])
        return [(v, m) for v, m, _ in out]

    def nonzero(self) -> list:
        """(matrix eigenvalue, multiplicity) for the nonzero eigenvalues."""
        return [(self.sign_map(e.value), e.multiplicity) for e in self.entries if e.value != 0]

    def zero_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries if e.value == 0)

    def multiplicity_of(self, z, tol=1e-9) -> int:
        return sum(e.multiplicity for e in self.entries if abs(float(e.value) - float(z)) <= tol)

    def to_rows(self) -> list:
        rows = []
        for e in self.entries:
            rows.append({
                "level": self.level,
                "value_decimation": e.value,
                "value_matrix": self.sign_map(e.value),
                "seed": e.seed.label,
                "depth": e.depth,
                "multiplicity": e.multiplicity,
            })
        return rows


def spectrum(spec: ModelSpec, n: int, precision=None, kind: str | None = None,
             level_cap: int = 12) -> SpectrumMultiset:
    if n < 0:
        raise ValueError("level must be nonnegative")
    if n > level_cap:
        raise ValueError(f"level cap exceeded: {n} > {level_cap}")
    kind = kind or spec.laplacian_kind
    sign = SignMap(kind, spec.scale(kind))
    dps = precision if precision is not None else working_dps(n)
    entries = []
    for s in spec.fixed_seeds():
        mult = s.multiplicity(n)
        if mult > 0:
            entries.append(LabeledEigenvalue(s.value, s, 0, 0, mult, 0))
    for s in spec.primitive_seeds():
        births = [(m, s.multiplicity(m)) for m in range(s.first_level, n + 1)]
        births = [(m, b) for m, b in births if b > 0]
        if not births:
            continue
        tree = preimage_tree(spec.map, s.value, n - births[0][0], dps)
        for m, b in births:
            for node in tree[n - m]:
                entries.append(LabeledEigenvalue(node.value, s, n - m, node.branch,
                                                 b * node.multiplicity, m))
    entries.sort(key=lambda e: (float(e.value), e.seed.label, e.depth, e.branch))
    out = SpectrumMultiset(level=n, entries=entries, sign_map=sign, model=spec.label(), lam=spec.map.lam)
    total = out.total_multiplicity()
    if total != spec.vertex_count(n):
        raise ArithmeticError(f"spectrum has {total} eigenvalues but |V_{n}| = {spec.vertex_count(n)}")
    if out.zero_multiplicity() != 1:
        raise ArithmeticError("zero eigenvalue must be simple")
    return out


def check_conjugation(spec: ModelSpec, spec_mult: SpectrumMultiset, rel: float = 1e-10) -> float:
    """Largest relative error of R^depth(value) against the seed value."""
    worst = 0.0
    dps = max(working_dps(spec_mult.level) or 30, 30)
    with mpmath.workdps(dps):
        for e in spec_mult.entries:
            z = mpmath.mpf(e.value) if not isinstance(e.value, Fraction) else \
                mpmath.mpf(e.value.numerator) / e.value.denominator
            # the mp map evaluation needs mp input
            back = spec.map.iterate(z, e.depth)
            target = float(e.seed.value)
            err = float(abs(back - target)) / max(1.0, abs(target))
            worst = max(worst, err)
    return worst


def _g0(rmap: RationalMap, x, dps):
    roots = preimages(rmap, x, dps)
    return min(roots, key=abs)


@dataclass(frozen=True)
class ContinuumEigenvalue:
    value: object
    multiplicity: int
    cauchy_difference: object
    seed: str
    level: int

    def __float__(self):
        return float(self.value)


def continuum_limit(rmap: RationalMap, z, depth: int = 20, dps=None):
    """lim lambda^j * (-g0^j(z)) along the inverse branch fixing 0.

    Returns (estimate, last Cauchy difference).  Raises if the differences do
    not shrink geometrically.
    """
    if depth < 5:
        raise ValueError("depth must be at least 5")
    dps = dps if dps is not None else working_dps(depth)
    with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
        lam = _to_num(rmap.lam, dps)
        y = _to_num(z, dps) if isinstance(z, (int, Fraction)) else z
        est_prev = -y
        diffs = []
        scale = lam
        for j in range(1, depth + 1):
            y = _g0(rmap, y, dps)
            est = -y * scale
            diffs.append(abs(est - est_prev))
            est_prev = est
            scale *= lam
        floor = abs(est_prev) * (1e-15 if dps is None else mpmath.mpf(10) ** (-dps + 5))
        tail = diffs[-4:]
        ok = all(b <= a or b <= floor for a, b in zip(tail, tail[1:]))
        if not ok:
            raise ArithmeticError("continuum limit does not converge geometrically")
        return est_prev, diffs[-1]


def continuum_eigenvalues(spec: ModelSpec, count: int, depth: int = 20, max_level: int = 10,
                          kind: str | None = None) -> list:
    """The ``count`` smallest nonzero continuum eigenvalues (with repetition),
    normalised by the matrix sign map of ``kind``.

    Level-N spectra are scanned with increasing N until the selection is stable.
    """
    if count < 1:
        raise ValueError("count must be positive")
    kind = kind or spec.laplacian_kind
    c = abs(spec.scale(kind))
    dps = working_dps(depth)
    lam = spec.map.lam
    previous = None
    for N in range(1, max_level + 1):
        sp = spectrum(spec, N, precision=dps)
        vals = []
        for e in sp.entries:
            if e.seed.kind != "primitive":
                continue
            lim, diff = continuum_limit(spec.map, e.value, depth, dps)
            with (mpmath.workdps(dps) if dps is not None else _NullCtx()):
                factor = (mpmath.mpf(lam.numerator) / lam.denominator) ** N if dps else float(lam) ** N
                vals.append(ContinuumEigenvalue(lim * factor * float(c) if dps is None
                                                else lim * factor * mpmath.mpf(c.numerator) / c.denominator,
                                                e.multiplicity, diff * factor, e.seed.label, N))
        vals.sort(key=lambda v: float(v.value))
        flat = []
        for v in vals:
            flat.extend([v] * v.multiplicity)
            if len(flat) >= count:
                break
        flat = flat[:count]
        if previous is not None and len(flat) == count and len(previous) == count and all(
                abs(float(a.value) - float(b.value)) <= 1e-9 * abs(float(a.value))
                for a, b in zip(flat, previous)):
            return flat
        previous = flat
    raise ArithmeticError("continuum eigenvalue selection did not stabilise")


SPECTRUM_FIELDS = ["level", "value_decimation", "value_matrix", "seed", "depth", "multiplicity"]


def _fmt(x, digits=20):
    if isinstance(x, Fraction):
        return fraction_str(x)
    return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False) if not isinstance(x, (int,)) else str(x)


def spectrum_csv(sp: SpectrumMultiset, digits: int = 20) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_FIELDS)
    for r in sp.to_rows():
        w.writerow([r["level"], _fmt(r["value_decimation"], digits), _fmt(r["value_matrix"], digits),
                    r["seed"], r["depth"], r["multiplicity"]])
    return buf.getvalue()


def spectrum_dict(sp: SpectrumMultiset, digits: int = 20) -> dict:
    return {
        "model": sp.model,
        "level": sp.level,
        "kind": sp.sign_map.kind,
        "sign_map_scale": fraction_str(sp.sign_map.scale),
        "total_multiplicity": sp.total_multiplicity(),
        "entries": [
            {k: (_fmt(v, digits) if k.startswith("value") else v) for k, v in r.items() if k != "level"}
            for r in sp.to_rows()
        ],
    }


def spectrum_json(sp: SpectrumMultiset, digits: int = 20) -> str:
    return json.dumps(dict(schema=1, **spectrum_dict(sp, digits)), indent=2)
