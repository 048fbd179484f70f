"""Factored determinants, spanning-tree counts and the log-determinant expansion.

Determinants come from the seed data alone: the product of the depth-k
preimages of a seed value beta is beta * rho**((d**k - 1)/(d - 1)) with
rho = (-1)**(d+1) Q(0)/P_d, so exponents are exact integers and no
eigenvalue is ever computed numerically.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy

from .graphs import build_graph
from .models import ModelSpec, fraction_str


def _factor_rational(x: Fraction) -> dict:
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"base must be positive, got {x}")
    out = Counter()
    for pr, e in sympy.factorint(x.numerator).items():
        out[int(pr)] += e
    for pr, e in sympy.factorint(x.denominator).items():
        out[int(pr)] -= e
    return {k: v for k, v in out.items() if v}


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


@dataclass(frozen=True)
class FactoredReal:
    """Exact positive real prod(base**exponent) over a small set of rational bases."""

    factors: tuple  # ((base, exponent), ...) sorted by base
    labels: tuple = ()  # ((base, label), ...)

    @classmethod
    def make(cls, factors, labels=None) -> "FactoredReal":
        acc = Counter()
        for b, e in (factors.items() if isinstance(factors, dict) else factors):
            b = Fraction(b)
            if b <= 0:
                raise ValueError(f"base must be positive, got {b}")
            if b == 1:
                continue
            acc[b] += int(e)
        lab = dict(labels or {})
        items = tuple(sorted((b, e) for b, e in acc.items() if e != 0))
        return cls(items, tuple(sorted((b, lab[b]) for b, _ in items if b in lab)))

    @classmethod
    def one(cls) -> "FactoredReal":
        return cls(())

    @classmethod
    def of_int(cls, n: int) -> "FactoredReal":
        return cls.make(_factor_rational(Fraction(n)))

    def as_dict(self) -> dict:
        return dict(self.factors)

    def _label_map(self) -> dict:
        return dict(self.labels)

    def __mul__(self, other: "FactoredReal") -> "FactoredReal":
        acc = Counter(self.as_dict())
        acc.update(other.as_dict())
        lab = self._label_map()
        lab.update(other._label_map())
        return FactoredReal.make(acc, lab)

    def __truediv__(self, other: "FactoredReal") -> "FactoredReal":
        return self * other ** -1

    def __pow__(self, k: int) -> "FactoredReal":
        return FactoredReal.make({b: e * k for b, e in self.factors}, self._label_map())

    def to_fraction(self) -> Fraction:
        out = Fraction(1)
        for b, e in self.factors:
            out *= b ** e
        return out

    def log(self, dps: int = 50):
        with mpmath.workdps(dps):
            return mpmath.fsum(e * mpmath.log(_mp(b)) for b, e in self.factors) if self.factors \
                else mpmath.mpf(0)

    def value(self, dps: int = 50):
        with mpmath.workdps(dps):
            return mpmath.exp(self.log(dps + 10))

    def prime_exponents(self) -> dict:
        acc = Counter()
        for b, e in self.factors:
            for pr, k in _factor_rational(b).items():
                acc[pr] += k * e
        return {pr: k for pr, k in sorted(acc.items()) if k}

    def to_primes(self) -> "FactoredReal":
        return FactoredReal.make(self.prime_exponents())

    def express_in(self, bases) -> "FactoredReal | None":
        """Rewrite over labelled ``bases`` ((label, value) pairs) when the exponents
        are uniquely determined integers; None otherwise."""
        seen, uniq = set(), []
        for lab, val in bases:
            val = Fraction(val)
            if val not in seen and val != 1:
                seen.add(val)
                uniq.append((lab, val))
        target = self.prime_exponents()
        cols = [_factor_rational(v) for _, v in uniq]
        primes = sorted(set(target) | {p for c in cols for p in c})
        # exact Gauss-Jordan on the prime-exponent system
        rows = [[Fraction(c.get(pr, 0)) for c in cols] + [Fraction(target.get(pr, 0))] for pr in primes]
        ncol = len(cols)
        piv_cols = []
        r = 0
        for c in range(ncol):
            piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
            if piv is None:
                return None  # dependent bases: exponents not unique
            rows[r], rows[piv] = rows[piv], rows[r]
            pv = rows[r][c]
            rows[r] = [x / pv for x in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c] != 0:
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            piv_cols.append(c)
            r += 1
        if any(row[-1] != 0 for row in rows[r:]):
            return None
        sol = [rows[i][-1] for i in range(ncol)]
        if any(x.denominator != 1 for x in sol):
            return None
        return FactoredReal.make({v: int(x) for (_, v), x in zip(uniq, sol)},
                                 {v: lab for lab, v in uniq})

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactoredReal):
            return NotImplemented
        return self.prime_exponents() == other.prime_exponents()

    def __hash__(self):
        return hash(tuple(self.prime_exponents().items()))

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        lab = self._label_map()
        parts = []
        for b, e in self.factors:
            name = lab.get(b, fraction_str(b))
            if not (name.isdigit()):
                name = f"({name})"
            parts.append(name if e == 1 else f"{name}^{e}")
        return " * ".join(parts)

    def __repr__(self) -> str:
        return f"FactoredReal({self})"


def _label_in_model(fr: FactoredReal, spec: ModelSpec) -> FactoredReal:
    if spec.factored_bases:
        alt = fr.express_in(spec.factored_bases)
        if alt is not None:
            return alt
    return fr.to_primes()


def discrete_det(spec: ModelSpec, n: int, kind: str | None = None) -> FactoredReal:
    """Product of the nonzero eigenvalues of the level-n Laplacian of ``kind``,
    assembled from the seed schedules."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    kind = kind or spec.laplacian_kind
    c = spec.scale(kind)
    d = spec.map.degree
    rho = spec.map.root_product_ratio()
    sign = 1
    acc = Counter()

    def put(base: Fraction, exp: int):
        nonlocal sign
        if exp == 0:
            return
        if base < 0 and exp % 2:
            sign = -sign
        acc[abs(base)] += exp

    for s in spec.fixed_seeds():
        if s.value == 0:
            continue
        put(c * s.value, s.multiplicity(n))
    for s in spec.primitive_seeds():
        for m in range(s.first_level, n + 1):
            b = s.multiplicity(m)
            if b == 0:
                continue
            k = n - m
            dk = d ** k
            put(c, dk * b)
            put(s.value, b)
            put(rho, (dk - 1) // (d - 1) * b)
    if sign != 1:
        raise ArithmeticError("negative product of nonzero eigenvalues")
    return _label_in_model(FactoredReal.make(acc), spec)


def _pq_bases(spec):
    p, q = spec.p, spec.q
    return {"pq": p * q, "1-p^2": 1 - p * p, "1-q^2": 1 - q * q}


def closed_form_det(spec: ModelSpec, n: int, kind: str | None = None) -> FactoredReal:
    """Published closed forms for det of the level-n Laplacian."""
    kind = kind or spec.laplacian_kind
    if spec.name == "diamond" and kind == "probabilistic":
        e = Fraction(-(2 * 4 ** n - 6 * n - 11), 9)
        if e.denominator != 1:
            raise ArithmeticError("non-integral exponent")
        return FactoredReal.make({2: int(e)})
    if spec.name == "double-sg" and kind == "combinatorial":
        return FactoredReal.make({2: 3 ** n + 1, 3: (3 ** (n + 1) + 1) // 2, 5: (3 ** n + 2 * n - 1) // 2})
    if spec.name == "double-pq" and kind == "pq-weighted":
        b = _pq_bases(spec)
        fr = FactoredReal.make({2: 2 * 3 ** n}, {Fraction(2): "2"})
        for lab, e in (("1-q^2", n), ("1-p^2", n), ("pq", 3 ** n - 2 * n - 1)):
            fr = fr * FactoredReal.make({b[lab]: e}, {b[lab]: lab})
        return fr
    raise ValueError(f"no closed form recorded for {spec.name} with the {kind} Laplacian")


def _degree_factor(spec: ModelSpec, n: int) -> FactoredReal:
    g = build_graph(spec, n)
    if not g.is_unweighted():
        raise ValueError("spanning trees are only defined here for unweighted graphs (p = 1/2)")
    counts = Counter(int(d) for d in g.degrees)
    fr = FactoredReal.one()
    for deg, k in counts.items():
        fr = fr * FactoredReal.of_int(deg) ** k
    return fr / FactoredReal.of_int(sum(int(d) for d in g.degrees))


def _check_unweighted(spec: ModelSpec):
    if spec.p is not None and spec.p != Fraction(1, 2):
        raise ValueError("weighted model (p != 1/2): spanning trees are not defined")


def spanning_trees_factored(spec: ModelSpec, n: int, route: str = "auto") -> FactoredReal:
    if n < 1:
        raise ValueError("level must be at least 1")
    _check_unweighted(spec)
    if route == "auto":
        route = "laplacian" if "combinatorial" in spec.kinds() else "degrees"
    if route == "laplacian":
        if "combinatorial" not in spec.kinds():
            raise ValueError(f"{spec.name}: no decimation data for the combinatorial Laplacian")
        fr = discrete_det(spec, n, "combinatorial") / FactoredReal.of_int(spec.vertex_count(n))
    elif route == "degrees":
        fr = _degree_factor(spec, n) * discrete_det(spec, n, "probabilistic")
    else:
        raise ValueError(f"unknown route {route!r}")
    fr = fr.to_primes()
    if any(e < 0 for _, e in fr.factors):
        raise ArithmeticError(f"non-integral spanning tree count {fr}")
    return fr


def spanning_trees(spec: ModelSpec, n: int, route: str = "auto") -> int:
    return int(spanning_trees_factored(spec, n, route).to_fraction())


def closed_form_trees(spec: ModelSpec, n: int) -> int:
    if spec.name == "double-sg":
        return 2 ** (3 ** n + 1) * 3 ** ((3 ** (n + 1) - 2 * n - 1) // 2) * 5 ** ((3 ** n + 2 * n - 1) // 2)
    if spec.name == "double-pq" and spec.p == Fraction(1, 2):
        return 2 * 3 ** n
    raise ValueError(f"no closed form recorded for spanning trees of {spec.name}")


_L2, _L3, _L5 = sympy.log(2), sympy.log(3), sympy.log(5)


def complexity_closed_form(spec: ModelSpec):
    if spec.name == "diamond":
        return _L2
    if spec.name in ("sg", "double-sg"):
        return _L2 / 3 + _L3 / 2 + _L5 / 6
    if spec.name == "double-pq" and spec.p == Fraction(1, 2):
        return sympy.Integer(0)  # tau = |V_n| on a cycle
    return None


@dataclass(frozen=True)
class ComplexityResult:
    closed_form: object  # sympy expression or None
    value: float | None
    table: tuple  # ((n, log tau / |V_n|), ...)


def complexity_constant(spec: ModelSpec, levels=range(1, 9)) -> ComplexityResult:
    _check_unweighted(spec)
    table = []
    for n in levels:
        fr = spanning_trees_factored(spec, n)
        table.append((n, fr.log(40) / spec.vertex_count(n)))
    cf = complexity_closed_form(spec)
    return ComplexityResult(cf, None if cf is None else float(cf), tuple(table))


# ---- log-linear combinations sum_p a_p log p ----------------------------------

def log_vector(expr) -> dict:
    """Write a sympy expression sum r_i log(x_i) (rational r_i, x_i) as {prime: coefficient}."""
    expr = sympy.expand(sympy.expand_log(sympy.sympify(expr), force=True))
    out = Counter()
    for term in sympy.Add.make_args(expr):
        if term == 0:
            continue
        coeff, rest = term.as_coeff_Mul()
        if not isinstance(rest, sympy.log):
            raise ValueError(f"not a rational combination of logarithms: {term}")
        arg = rest.args[0]
        if not arg.is_Rational:
            raise ValueError(f"logarithm of a non-rational argument: {arg}")
        for pr, k in _factor_rational(Fraction(int(arg.p), int(arg.q))).items():
            out[pr] += Fraction(int(coeff.p), int(coeff.q)) * k
    return {k: v for k, v in sorted(out.items()) if v}


def vector_to_expr(vec: dict):
    return sympy.Add(*[sympy.Rational(v.numerator, v.denominator) * sympy.log(k) for k, v in vec.items()])


def vector_value(vec: dict, dps: int = 50):
    with mpmath.workdps(dps):
        return mpmath.fsum(_mp(Fraction(v)) * mpmath.log(k) for k, v in vec.items()) if vec else mpmath.mpf(0)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """log det = per_vertex * |V_n| + per_level * n + constant, each stored as
    {prime: rational} over log(prime)."""

    model: str
    kind: str
    per_vertex_vec: tuple
    per_level_vec: tuple
    constant_vec: tuple

    @property
    def per_vertex(self):
        return vector_to_expr(dict(self.per_vertex_vec))

    @property
    def per_level(self):
        return vector_to_expr(dict(self.per_level_vec))

    @property
    def constant(self):
        return vector_to_expr(dict(self.constant_vec))

    def values(self, dps: int = 30):
        return tuple(vector_value(dict(v), dps) for v in
                     (self.per_vertex_vec, self.per_level_vec, self.constant_vec))

    def predicted_log_det(self, vertices: int, n: int, dps: int = 50):
        a, b, c = self.values(dps)
        with mpmath.workdps(dps):
            return a * vertices + b * n + c


def _fit_exponent(seq: dict) -> tuple:
    # e(n) = A 3^n + B n + C through n = 1, 2, 3
    d1 = Fraction(seq[2] - seq[1])
    d2 = Fraction(seq[3] - seq[2])
    A = (d2 - d1) / 12
    B = d1 - 6 * A
    C = seq[1] - 3 * A - B
    return A, B, C


def det_expansion(spec: ModelSpec, levels=range(1, 11)) -> ExpansionCoefficients:
    """Fit exact exponents of discrete_det to A 3^n + B n + C and read off the
    coefficients of |V_n|, n and 1 in log det."""
    if spec.name not in ("double-sg", "double-pq"):
        raise ValueError(f"the log-determinant expansion is only established for double-sg and "
                         f"double-pq, not {spec.name}")
    kind = "combinatorial" if spec.name == "double-sg" else "pq-weighted"
    levels = list(levels)
    if not {1, 2, 3} <= set(levels):
        raise ValueError("levels must include 1, 2 and 3")
    exps = {n: discrete_det(spec, n, kind).prime_exponents() for n in levels}
    primes = sorted({p for e in exps.values() for p in e})
    law = spec.vertex_count_law  # V * 3^n for both doubles
    if len(law.terms) != 1 or law.terms[0][1] != 3:
        raise ValueError("expected |V_n| proportional to 3^n")
    vcoef = law.terms[0][0]
    pv, pl, cst = {}, {}, {}
    for pr in primes:
        seq = {n: exps[n].get(pr, 0) for n in levels}
        A, B, C = _fit_exponent(seq)
        for n in levels:
            if A * 3 ** n + B * n + C != seq[n]:
                raise ArithmeticError(f"exponent of {pr} is not of the form A 3^n + B n + C")
        pv[pr], pl[pr], cst[pr] = A / vcoef, B, C
    clean = lambda d: tuple((k, v) for k, v in sorted(d.items()) if v)
    return ExpansionCoefficients(spec.name, kind, clean(pv), clean(pl), clean(cst))


def printed_expansion(spec: ModelSpec):
    """Closed-form (per_vertex, per_level, log det L) for the double models."""
    if spec.name == "double-sg":
        return (_L2 / 3 + _L3 / 2 + _L5 / 6, _L5, -_L2 - _L3 / 2 + _L5 / 2)
    if spec.name == "double-pq":
        p = sympy.Rational(spec.p.numerator, spec.p.denominator)
        q = 1 - p
        return (_L2 + sympy.log(p * q) / 2, sympy.log((1 - q ** 2) * (1 - p ** 2) / (p * q) ** 2),
                sympy.log(p * q))
    raise ValueError(f"no printed expansion for {spec.name}")


def expansion_residual(spec: ModelSpec, coeffs: ExpansionCoefficients, n: int, dps: int = 50):
    """log det (from the factored value) minus the expansion, at level n."""
    lhs = discrete_det(spec, n, coeffs.kind).log(dps)
    rhs = coeffs.predicted_log_det(spec.vertex_count(n), n, dps)
    with mpmath.workdps(dps):
        return lhs - rhs
