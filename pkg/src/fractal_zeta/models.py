"""Built-in fractal families and their spectral decimation data.

Every model is described in *decimation coordinates*: the eigenvalue seeds and
the map R live on the non-positive half line, and each model records how
those coordinates relate to eigenvalues of concrete Laplacian matrices
(``sign_maps``).  All data are exact rationals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import sympy

MODEL_NAMES = ("diamond", "sg", "double-sg", "pq", "double-pq")
LAPLACIAN_KINDS = ("combinatorial", "probabilistic", "pq-weighted")


def as_fraction(x) -> Fraction:
    """Coerce ints, strings like "3/10" and short decimal floats to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _hpoly(coeffs, z):
    acc = 0 * z
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _coerce_coeffs(coeffs, z):
    # keep exact arithmetic for Fractions, convert for float/mp/numpy inputs
    if isinstance(z, (Fraction, int)):
        return coeffs
    try:
        import mpmath
        if isinstance(z, (mpmath.mpf, mpmath.mpc)):
            return [mpmath.mpf(c.numerator) / c.denominator for c in coeffs]
    except ImportError:  # pragma: no cover
        pass
    return [float(c) for c in coeffs]


@dataclass(frozen=True)
class RationalMap:
    """R(z) = P(z)/Q(z) with ascending coefficient tuples."""

    numerator_coeffs: tuple
    denominator_coeffs: tuple = (Fraction(1),)
    degree: int | None = None
    leading_coeff: Fraction | None = None
    lambda_: Fraction | None = None

    def __post_init__(self):
        num = tuple(as_fraction(c) for c in self.numerator_coeffs)
        den = tuple(as_fraction(c) for c in self.denominator_coeffs)
        while len(num) > 1 and num[-1] == 0:
            num = num[:-1]
        while len(den) > 1 and den[-1] == 0:
            den = den[:-1]
        object.__setattr__(self, "numerator_coeffs", num)
        object.__setattr__(self, "denominator_coeffs", den)
        if self.degree is None:
            object.__setattr__(self, "degree", self.computed_degree())
        if self.leading_coeff is None:
            object.__setattr__(self, "leading_coeff", num[-1])
        else:
            object.__setattr__(self, "leading_coeff", as_fraction(self.leading_coeff))
        if self.lambda_ is None:
            object.__setattr__(self, "lambda_", self.derivative_at_zero())
        else:
            object.__setattr__(self, "lambda_", as_fraction(self.lambda_))

    @property
    def lam(self) -> Fraction:
        return self.lambda_

    def computed_degree(self) -> int:
        return max(len(self.numerator_coeffs), len(self.denominator_coeffs)) - 1

    def derivative_at_zero(self) -> Fraction:
        num, den = self.numerator_coeffs, self.denominator_coeffs
        p0 = num[0]
        p1 = num[1] if len(num) > 1 else Fraction(0)
        q0 = den[0]
        q1 = den[1] if len(den) > 1 else Fraction(0)
        if q0 == 0:
            raise ZeroDivisionError("Q(0) = 0")
        return (p1 * q0 - p0 * q1) / (q0 * q0)

    def __call__(self, z):
        num = _coerce_coeffs(self.numerator_coeffs, z)
        den = _coerce_coeffs(self.denominator_coeffs, z)
        if len(den) == 1:
            return _hpoly(num, z) / den[0]
        return _hpoly(num, z) / _hpoly(den, z)

    def iterate(self, z, k: int):
        for _ in range(k):
            z = self(z)
        return z

    def root_product_ratio(self) -> Fraction:
        """(-1)^(d+1) Q(0)/P_d.

        When P(0) = 0 and deg Q < d, the d roots of R(z) = w multiply to
        w times this ratio.
        """
        d = self.degree
        if len(self.denominator_coeffs) - 1 >= d:
            raise ValueError("need deg Q < deg P")
        sign = 1 if d % 2 == 1 else -1
        return sign * self.denominator_coeffs[0] / self.numerator_coeffs[-1]

    def preimage_polynomial(self, w) -> list:
        """Ascending coefficients of P(z) - w Q(z)."""
        num, den = list(self.numerator_coeffs), list(self.denominator_coeffs)
        n = max(len(num), len(den))
        num += [0] * (n - len(num))
        den += [0] * (n - len(den))
        return [a - w * b for a, b in zip(num, den)]

    def sympy_expr(self, z):
        num = sum(sympy.Rational(c.numerator, c.denominator) * z**i
                  for i, c in enumerate(self.numerator_coeffs))
        den = sum(sympy.Rational(c.numerator, c.denominator) * z**i
                  for i, c in enumerate(self.denominator_coeffs))
        return num / den

    def to_dict(self) -> dict:
        return {
            "num": [fraction_str(c) for c in self.numerator_coeffs],
            "den": [fraction_str(c) for c in self.denominator_coeffs],
            "lambda": fraction_str(self.lambda_),
            "degree": self.degree,
        }


@dataclass(frozen=True)
class ExpPoly:
    """Integer sequence n -> sum_j c_j * r_j**n for n >= start, with explicit
    exceptional values; zero below ``start`` unless listed in ``exceptions``."""

    terms: tuple = ()
    start: int = 0
    exceptions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms",
                           tuple((as_fraction(c), int(r)) for c, r in self.terms))
        object.__setattr__(self, "exceptions",
                           tuple(sorted((int(n), int(v)) for n, v in self.exceptions)))

    def __call__(self, n: int) -> int:
        for k, v in self.exceptions:
            if k == n:
                return v
        if n < self.start:
            return 0
        val = sum((c * Fraction(r) ** n for c, r in self.terms), Fraction(0))
        if val.denominator != 1:
            raise ArithmeticError(f"non-integral sequence value {val} at n={n}")
        return int(val)

    def generating_function(self, u):
        """sympy expression for sum_{m >= 1} a(m) u^(-m)."""
        total = sympy.Integer(0)
        lo = max(self.start, 1)
        for c, r in self.terms:
            # sum_{m >= lo} r^m u^-m = (r/u)^lo / (1 - r/u)
            cc = sympy.Rational(c.numerator, c.denominator)
            total += cc * (sympy.Integer(r) / u) ** lo / (1 - sympy.Integer(r) / u)
        for k, v in self.exceptions:
            if k >= 1:
                regular = self._regular(k) if k >= self.start else 0
                total += (v - regular) * u ** (-k)
        return sympy.cancel(sympy.together(total))

    def _regular(self, n: int) -> int:
        val = sum((c * Fraction(r) ** n for c, r in self.terms), Fraction(0))
        return int(val)

    def to_dict(self) -> dict:
        return {
            "terms": [[fraction_str(c), r] for c, r in self.terms],
            "start": self.start,
            "exceptions": {str(k): v for k, v in self.exceptions},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExpPoly":
        return cls(terms=tuple((Fraction(c), int(r)) for c, r in d.get("terms", [])),
                   start=int(d.get("start", 0)),
                   exceptions=tuple((int(k), int(v)) for k, v in d.get("exceptions", {}).items()))


@dataclass(frozen=True)
class Schedule:
    """Multiplicity schedule of a seed.

    ``law`` is the closed form.  ``table`` holds values measured on dense
    spectra; where present it takes precedence and the test suite checks that
    it agrees with ``law``.
    """

    law: ExpPoly
    table: tuple = ()
    source: str = "closed form"

    def __call__(self, n: int) -> int:
        for k, v in self.table:
            if k == n:
                return v
        return self.law(n)

    def table_matches_law(self) -> bool:
        return all(self.law(k) == v for k, v in self.table)


@dataclass(frozen=True)
class EigenvalueSeed:
    value: Fraction
    kind: str  # "fixed" or "primitive"
    schedule: Schedule
    first_level: int
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.kind not in ("fixed", "primitive"):
            raise ValueError(f"unknown seed kind {self.kind!r}")
        if not self.label:
            object.__setattr__(self, "label", fraction_str(self.value))

    def multiplicity(self, n: int) -> int:
        if n < self.first_level:
            return 0
        return self.schedule(n)

    @property
    def multiplicity_schedule(self):
        return self.multiplicity


@dataclass(frozen=True)
class ModelSpec:
    name: str
    map: RationalMap
    seeds: tuple
    vertex_count_law: ExpPoly
    laplacian_kind: str
    sign_maps: tuple  # ((kind, scale), ...): matrix eigenvalue = scale * z
    p: Fraction | None = None
    spectral_dimension_expr: object = None
    factored_bases: tuple = ()  # ((label, value), ...)
    base_model: str = ""

    @property
    def q(self) -> Fraction | None:
        return None if self.p is None else 1 - self.p

    @property
    def spectral_dimension(self) -> float:
        return float(self.spectral_dimension_expr)

    def kinds(self) -> tuple:
        return tuple(k for k, _ in self.sign_maps)

    def scale(self, kind: str | None = None) -> Fraction:
        kind = kind or self.laplacian_kind
        for k, c in self.sign_maps:
            if k == kind:
                return c
        raise ValueError(f"model {self.name} has no decimation data for the {kind} Laplacian")

    def fixed_seeds(self):
        return [s for s in self.seeds if s.kind == "fixed"]

    def primitive_seeds(self):
        return [s for s in self.seeds if s.kind == "primitive"]

    def vertex_count(self, n: int) -> int:
        return self.vertex_count_law(n)

    def total_multiplicity(self, n: int) -> int:
        d = self.map.degree
        total = sum(s.multiplicity(n) for s in self.fixed_seeds())
        for s in self.primitive_seeds():
            for m in range(s.first_level, n + 1):
                total += s.multiplicity(m) * d ** (n - m)
        return total

    def label(self) -> str:
        return self.name if self.p is None else f"{self.name}(p={fraction_str(self.p)})"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "map": self.map.to_dict(),
            "seeds": [
                {
                    "value": fraction_str(s.value),
                    "label": s.label,
                    "kind": s.kind,
                    "first_level": s.first_level,
                    "schedule": dict(s.schedule.law.to_dict(),
                                     table={str(k): v for k, v in s.schedule.table},
                                     source=s.schedule.source),
                }
                for s in self.seeds
            ],
            "vertex_law": self.vertex_count_law.to_dict(),
            "laplacian_kind": self.laplacian_kind,
            "sign_maps": {k: fraction_str(c) for k, c in self.sign_maps},
            "params": {} if self.p is None else {"p": fraction_str(self.p),
                                                 "q": fraction_str(self.q)},
        }


def _seed(value, kind, law, first_level, label="", table=(), source="closed form"):
    return EigenvalueSeed(value=as_fraction(value), kind=kind,
                          schedule=Schedule(law=law, table=tuple(table), source=source),
                          first_level=first_level, label=label)


def _constant(c=1, start=0):
    return ExpPoly(terms=((c, 1),), start=start)


def _sg_map():
    return RationalMap((0, 5, 1))


def _diamond() -> ModelSpec:
    seeds = (
        _seed(0, "fixed", _constant(), 0),
        _seed(-2, "fixed", _constant(), 0, table=[(n, 1) for n in range(5)],
              source="dense oracle"),
        # (4^m + 2)/3 new copies of -1 at level m
        _seed(-1, "primitive", ExpPoly(((Fraction(1, 3), 4), (Fraction(2, 3), 1)), start=1), 1,
              table=[(1, 2), (2, 6), (3, 22), (4, 86)], source="dense oracle"),
    )
    return ModelSpec(
        name="diamond", map=RationalMap((0, 4, 2)), seeds=seeds,
        vertex_count_law=ExpPoly(((Fraction(2, 3), 4), (Fraction(4, 3), 1))),
        laplacian_kind="probabilistic",
        sign_maps=(("probabilistic", Fraction(-1)),),
        spectral_dimension_expr=sympy.Integer(2),
        factored_bases=(("2", Fraction(2)),),
    )


def _sg() -> ModelSpec:
    seeds = (
        _seed(0, "fixed", _constant(), 0),
        _seed(-6, "fixed", ExpPoly(((Fraction(1, 2), 3), (Fraction(3, 2), 1))), 0,
              table=[(0, 2), (1, 3), (2, 6), (3, 15), (4, 42)], source="dense oracle"),
        _seed(-3, "primitive", ExpPoly(((Fraction(1, 6), 3), (Fraction(3, 2), 1)), start=1), 1),
        _seed(-5, "primitive", ExpPoly(((Fraction(1, 6), 3), (Fraction(-1, 2), 1)), start=1), 2),
    )
    return ModelSpec(
        name="sg", map=_sg_map(), seeds=seeds,
        vertex_count_law=ExpPoly(((Fraction(3, 2), 3), (Fraction(3, 2), 1))),
        laplacian_kind="probabilistic",
        sign_maps=(("probabilistic", Fraction(-1, 4)),),
        spectral_dimension_expr=2 * sympy.log(3) / sympy.log(5),
        factored_bases=(("2", Fraction(2)), ("3", Fraction(3)), ("5", Fraction(5))),
    )


def _double_sg() -> ModelSpec:
    seeds = (
        _seed(0, "fixed", _constant(), 0),
        _seed(-6, "fixed", ExpPoly(((1, 3),), start=1, exceptions=((0, 2),)), 0,
              table=[(0, 2), (1, 3), (2, 9), (3, 27), (4, 81)], source="dense oracle"),
        _seed(-2, "primitive", ExpPoly((), start=2, exceptions=((1, 1),)), 1),
        _seed(-3, "primitive", ExpPoly(((Fraction(1, 3), 3),), start=2, exceptions=((1, 2),)), 1),
        _seed(-5, "primitive", ExpPoly(((Fraction(1, 3), 3), (1, 1)), start=1), 1),
    )
    return ModelSpec(
        name="double-sg", map=_sg_map(), seeds=seeds,
        vertex_count_law=ExpPoly(((3, 3),)),
        laplacian_kind="combinatorial",
        sign_maps=(("combinatorial", Fraction(-1)), ("probabilistic", Fraction(-1, 4))),
        spectral_dimension_expr=2 * sympy.log(3) / sympy.log(5),
        factored_bases=(("2", Fraction(2)), ("3", Fraction(3)), ("5", Fraction(5))),
    )


def pq_map(p) -> RationalMap:
    p = as_fraction(p)
    pq = p * (1 - p)
    # (1/pq) z (z^2/4 + 3z/2 + 2 + pq)
    return RationalMap((0, (2 + pq) / pq, Fraction(3, 2) / pq, Fraction(1, 4) / pq))


def _pq_bases(p, q, double):
    bases = [("2", Fraction(2)), ("pq", p * q)]
    if double:
        bases.append(("1-p^2", 1 - p * p))
    bases.append(("1-q^2", 1 - q * q))
    return tuple(bases)


def _pq(p, double: bool) -> ModelSpec:
    q = 1 - p
    every_level = ExpPoly(((1, 1),), start=1)
    seeds = [
        _seed(0, "fixed", _constant(), 0),
        _seed(-4, "fixed", _constant(), 0),
        _seed(-2 - 2 * q, "primitive", every_level, 1, label="-2-2q"),
        _seed(-2 + 2 * q, "primitive", every_level, 1, label="-2+2q"),
    ]
    if double:
        table = [(n, 1) for n in range(1, 5)]
        seeds += [
            _seed(-2 - 2 * p, "primitive", every_level, 1, label="-2-2p", table=table,
                  source="dense oracle"),
            _seed(-2 + 2 * p, "primitive", every_level, 1, label="-2+2p", table=table,
                  source="dense oracle"),
        ]
        law = ExpPoly(((2, 3),))
        kinds = (("pq-weighted", Fraction(-1)), ("probabilistic", Fraction(-1, 2)))
        if p == Fraction(1, 2):
            # unit conductances on a cycle: D - A = 2I - A is the negated generator
            kinds += (("combinatorial", Fraction(-1)),)
    else:
        law = ExpPoly(((1, 3), (1, 1)))
        kinds = (("pq-weighted", Fraction(-1)), ("probabilistic", Fraction(-1, 2)))
    lam = 1 + 2 / (p * q)
    return ModelSpec(
        name="double-pq" if double else "pq", map=pq_map(p), seeds=tuple(seeds),
        vertex_count_law=law, laplacian_kind="pq-weighted", sign_maps=kinds, p=p,
        spectral_dimension_expr=sympy.log(9) / sympy.log(sympy.Rational(lam.numerator, lam.denominator)),
        factored_bases=_pq_bases(p, q, double),
    )


def builtin_model(name: str, p=None) -> ModelSpec:
    if name not in MODEL_NAMES:
        raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}")
    if name in ("pq", "double-pq"):
        if p is None:
            raise ValueError(f"model {name} requires the parameter p")
        p = as_fraction(p)
        if not 0 < p < 1:
            raise ValueError(f"p out of range: {p} not in (0, 1)")
        return _pq(p, double=(name == "double-pq"))
    if p is not None:
        raise ValueError(f"model {name} takes no parameter p")
    return {"diamond": _diamond, "sg": _sg, "double-sg": _double_sg}[name]()


def validate_spec(spec: ModelSpec, levels: Iterable[int] = range(0, 5)) -> list:
    """Return a list of diagnostics; empty when all invariants hold."""
    out = []
    R = spec.map
    num = R.numerator_coeffs
    if num[0] != 0:
        out.append("R(0) must be 0: constant numerator coefficient is nonzero")
    if R.denominator_coeffs[0] == 0:
        out.append("Q(0) must be nonzero")
    else:
        lam = R.derivative_at_zero()
        if R.lambda_ != lam:
            out.append(f"stored λ = {R.lambda_} differs from R'(0) = {lam}")
        if lam <= 1 or R.lambda_ <= 1:
            out.append("λ must exceed 1")
    if R.degree < 2:
        out.append("degree must be at least 2")
    if R.degree != R.computed_degree():
        out.append(f"stored degree {R.degree} differs from coefficient degree {R.computed_degree()}")
    if R.leading_coeff != num[-1]:
        out.append("leading_coeff must equal the top numerator coefficient")
    if spec.laplacian_kind not in LAPLACIAN_KINDS:
        out.append(f"unknown laplacian kind {spec.laplacian_kind!r}")
    if spec.laplacian_kind not in spec.kinds():
        out.append("no sign map recorded for the default laplacian kind")
    for s in spec.seeds:
        for n in range(0, s.first_level):
            if s.schedule(n) != 0 and s.kind == "primitive":
                out.append(f"seed {s.label}: multiplicity must vanish below first_level")
                break
        if not s.schedule.table_matches_law():
            out.append(f"seed {s.label}: tabulated multiplicities disagree with the closed form")
        if any(s.multiplicity(n) < 0 for n in levels):
            out.append(f"seed {s.label}: negative multiplicity")
    if spec.name in ("pq", "double-pq") or spec.p is not None:
        p = spec.p
        if p is None or not 0 < p < 1:
            out.append("p out of range")
        else:
            q = 1 - p
            r = (p / (1 + p), q / (1 + p), p / (1 + p))
            m = (q / (1 + q), p / (1 + q), q / (1 + q))
            if sum(r) != 1:
                out.append("contraction factors must sum to 1")
            if sum(m) != 1:
                out.append("measure weights must sum to 1")
            lam = 1 + 2 / (p * q)
            if R.denominator_coeffs[0] != 0 and R.derivative_at_zero() != lam:
                out.append("λ must equal 1 + 2/(pq)")
    for n in levels:
        try:
            total = spec.total_multiplicity(n)
            count = spec.vertex_count(n)
        except (ArithmeticError, ValueError) as exc:
            out.append(f"level {n}: {exc}")
            continue
        if total != count:
            out.append(f"multiplicity total {total} at level {n} differs from |V_n| = {count}")
    return out


def catalog_json(specs: Iterable[ModelSpec] | None = None) -> str:
    if specs is None:
        specs = [builtin_model(n, p=Fraction(1, 2) if "pq" in n else None) for n in MODEL_NAMES]
    return json.dumps({"schema": 1, "models": [s.to_dict() for s in specs]}, indent=2)


def spec_from_dict(d: dict) -> ModelSpec:
    """Rebuild a ModelSpec from ``ModelSpec.to_dict`` output."""
    m = d["map"]
    seeds = []
    for s in d["seeds"]:
        sch = s["schedule"]
        seeds.append(_seed(Fraction(s["value"]), s["kind"], ExpPoly.from_dict(sch),
                           int(s["first_level"]), label=s.get("label", ""),
                           table=[(int(k), int(v)) for k, v in sch.get("table", {}).items()],
                           source=sch.get("source", "closed form")))
    p = d.get("params", {}).get("p")
    p = None if p is None else Fraction(p)
    base = builtin_model(d["name"], p) if d["name"] in MODEL_NAMES else None
    return ModelSpec(
        name=d["name"],
        map=RationalMap(tuple(Fraction(c) for c in m["num"]), tuple(Fraction(c) for c in m["den"]),
                        degree=int(m["degree"]), lambda_=Fraction(m["lambda"])),
        seeds=tuple(seeds),
        vertex_count_law=ExpPoly.from_dict(d["vertex_law"]),
        laplacian_kind=d["laplacian_kind"],
        sign_maps=tuple((k, Fraction(v)) for k, v in d["sign_maps"].items()),
        p=p,
        spectral_dimension_expr=None if base is None else base.spectral_dimension_expr,
        factored_bases=() if base is None else base.factored_bases,
    )
