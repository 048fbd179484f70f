"""Cross-checks behind ``fractal-zeta verify`` and the acceptance tests.

Each ``*_checks`` function returns a list of :class:`Check` records; suites
are unions of these lists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy

from . import determinants as D
from . import oracle as O
from . import zeta as Z
from .decimation import spectrum
from .graphs import build_graph, laplacian
from .models import builtin_model, fraction_str

PQ_SAMPLE = (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10))
ZETA_POINTS = (1.5, 2.0, 2.5, 3.0, 2 + 1j)
IDENTITY_TOL = 1e-10  # absolute series tolerance; the acceptance bar is 1e-6 relative


def sample_models():
    """The five built-ins, with the pq models at each sample p."""
    out = [builtin_model("diamond"), builtin_model("sg"), builtin_model("double-sg")]
    for p in PQ_SAMPLE:
        out.append(builtin_model("pq", p))
    for p in PQ_SAMPLE:
        out.append(builtin_model("double-pq", p))
    return out


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, (int, Fraction)):
        return fraction_str(Fraction(x))
    if isinstance(x, complex):
        return {"re": mpmath.nstr(mpmath.mpf(x.real), 20), "im": mpmath.nstr(mpmath.mpf(x.imag), 20)}
    if isinstance(x, (float, mpmath.mpf)):
        return mpmath.nstr(mpmath.mpf(x), 20, strip_zeros=False)
    return str(x)


@dataclass
class Check:
    id: str
    description: str
    passed: bool
    lhs: object = None
    rhs: object = None
    tolerance: object = None  # None means exact equality

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {"id": self.id, "description": self.description, "status": self.status,
                "lhs": _fmt(self.lhs), "rhs": _fmt(self.rhs),
                "tolerance": "exact" if self.tolerance is None else _fmt(float(self.tolerance))}


def exact(cid, desc, lhs, rhs) -> Check:
    return Check(cid, desc, lhs == rhs, lhs, rhs, None)


def close(cid, desc, lhs, rhs, tol, relative=False) -> Check:
    diff = abs(lhs - rhs)
    if relative:
        diff = diff / max(abs(rhs), 1e-300)
    return Check(cid, desc, bool(diff <= tol), lhs, rhs, tol)


def _failed(cid, desc, err) -> Check:
    return Check(cid, desc, False, f"error: {type(err).__name__}: {err}", None, None)


def _guard(cid, desc, fn):
    try:
        return fn()
    except Exception as err:  # failures become report entries
        return [_failed(cid, desc, err)]


@dataclass
class VerifyReport:
    suite: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        n_pass = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass}

    def to_dict(self) -> dict:
        return {"schema": 1, "suite": self.suite, "checks": [c.to_dict() for c in self.checks],
                "summary": self.summary()}


# ---------------------------------------------------------------------------
# criterion 1: decimation spectra against dense eigenvalues

def oracle_spectrum_checks(levels=(1, 2, 3), tol: float = 1e-9) -> list:
    out = []
    for spec in sample_models():
        for kind in spec.kinds():
            for n in levels:
                cid = f"spectrum.{spec.label()}.{kind}.n{n}"
                desc = f"decimation vs dense spectrum, {spec.label()} {kind} level {n}"

                def run(spec=spec, kind=kind, n=n, cid=cid, desc=desc):
                    sp = spectrum(spec, n, kind=kind)
                    lap = laplacian(build_graph(spec, n), kind).nonnegative()
                    dense = O.dense_spectrum(lap)
                    mine = sp.matrix_values()
                    worst = max(abs(a - b) for a, b in zip(mine, dense)) if len(mine) == len(dense) else math.inf
                    mult_ok = [m for _, m in O.cluster(mine)] == [m for _, m in O.cluster(dense)]
                    return [Check(cid, desc, bool(worst <= tol and mult_ok), worst, 0.0, tol)]
                out.extend(_guard(cid, desc, run))
    return out


# ---------------------------------------------------------------------------
# criterion 2: determinants

def determinant_oracle_checks(levels=(1, 2, 3)) -> list:
    out = []
    for spec in sample_models():
        for kind in spec.kinds():
            for n in levels:
                cid = f"det.oracle.{spec.label()}.{kind}.n{n}"
                desc = f"discrete_det equals exact pseudo-determinant, {spec.label()} {kind} level {n}"

                def run(spec=spec, kind=kind, n=n, cid=cid, desc=desc):
                    lap = laplacian(build_graph(spec, n), kind).nonnegative()
                    return [exact(cid, desc, D.discrete_det(spec, n, kind).to_fraction(), O.pseudo_det(lap))]
                out.extend(_guard(cid, desc, run))
    return out


def determinant_closed_form_checks(levels=range(0, 11)) -> list:
    out = []
    cases = [(builtin_model("diamond"), "probabilistic"), (builtin_model("double-sg"), "combinatorial")]
    cases += [(builtin_model("double-pq", p), "pq-weighted") for p in PQ_SAMPLE]
    for spec, kind in cases:
        for n in levels:
            cid = f"det.closed.{spec.label()}.n{n}"
            desc = f"factored det of the {kind} Laplacian matches the closed form, {spec.label()} level {n}"
            out.extend(_guard(cid, desc, lambda spec=spec, kind=kind, n=n, cid=cid, desc=desc: [
                exact(cid, desc, D.discrete_det(spec, n, kind), D.closed_form_det(spec, n, kind))]))
    return out


def determinant_checks() -> list:
    return determinant_oracle_checks() + determinant_closed_form_checks()


# ---------------------------------------------------------------------------
# criterion 3: spanning trees

def spanning_tree_checks() -> list:
    out = []
    dsg = builtin_model("double-sg")

    def three_routes():
        g = build_graph(dsg, 1)
        cof = [O.matrix_tree_count(g, k) for k in (0, 4, 8)]
        routes = {"closed form": D.closed_form_trees(dsg, 1),
                  "det/|V|": D.spanning_trees(dsg, 1, "laplacian"),
                  "cofactor": cof[0]}
        res = [exact("trees.double-sg.n1." + k.replace(" ", "-").replace("/", "-over-"),
                     f"double-sg level 1 spanning trees via {k}", v, 10800) for k, v in routes.items()]
        res.append(exact("trees.double-sg.n1.cofactor-choice", "cofactor independent of the deleted vertex",
                         len(set(cof)), 1))
        return res
    out += _guard("trees.double-sg.n1", "double-sg level 1 spanning trees", three_routes)
    for n in range(1, 7):
        cid = f"trees.double-sg.n{n}"
        out += _guard(cid, "", lambda n=n, cid=cid: [exact(cid, f"double-sg tau closed form, level {n}",
                                                           D.spanning_trees(dsg, n), D.closed_form_trees(dsg, n))])
    cyc = builtin_model("double-pq", Fraction(1, 2))
    for n in range(1, 7):
        cid = f"trees.double-pq(1/2).n{n}"
        out += _guard(cid, "", lambda n=n, cid=cid: [exact(cid, f"double-pq(1/2) tau = 2*3^n, level {n}",
                                                           D.spanning_trees(cyc, n), 2 * 3 ** n)])
    for n in (1, 2):
        cid = f"trees.double-pq(1/2).cofactor.n{n}"
        out += _guard(cid, "", lambda n=n, cid=cid: [exact(cid, f"cycle cofactor count, level {n}",
                                                           O.matrix_tree_count(build_graph(cyc, n)), 2 * 3 ** n)])
    return out


# ---------------------------------------------------------------------------
# criterion 4: regularized determinants

def regdet_checks(tol: float = 1e-15) -> list:
    cases = [(builtin_model("diamond"), sympy.Integer(2) ** sympy.Rational(-10, 9)),
             (builtin_model("double-sg"), sympy.sqrt(sympy.Rational(5, 3)) / 2)]
    for p in PQ_SAMPLE:
        pr = sympy.Rational(p.numerator, p.denominator)
        cases.append((builtin_model("double-pq", p), pr * (1 - pr)))
    out = []
    for spec, expected in cases:
        cid = f"regdet.{spec.label()}"

        def run(spec=spec, expected=expected, cid=cid):
            rd = Z.regularized_det(spec)
            sym = sympy.simplify(rd.closed_form - expected) == 0
            with mpmath.workdps(40):
                diff = abs(mpmath.mpf(str(sympy.N(rd.closed_form, 40))) - mpmath.mpf(str(sympy.N(expected, 40))))
            return [exact(cid + ".symbolic", f"exp(-zeta'(0)) for {spec.label()} equals {expected}",
                          str(rd.closed_form) if sym else str(rd.closed_form),
                          str(rd.closed_form) if sym else str(expected)),
                    Check(cid + ".decimal", f"decimal value for {spec.label()}", bool(diff <= tol),
                          mpmath.mpf(str(sympy.N(rd.closed_form, 30))), mpmath.mpf(str(sympy.N(expected, 30))), tol)]
        out += _guard(cid, "", run)
    sg = builtin_model("sg")

    def sg_raises():
        try:
            Z.regularized_det(sg)
        except ValueError:
            return [exact("regdet.sg.undefined", "single SG keeps imaginary-axis poles (error raised)", True, True)]
        return [exact("regdet.sg.undefined", "single SG keeps imaginary-axis poles (error raised)", False, True)]
    out += sg_raises()
    return out


# ---------------------------------------------------------------------------
# criterion 5: log-determinant expansions

def expansion_checks(levels=range(1, 11), tol: float = 1e-12) -> list:
    out = []
    specs = [builtin_model("double-sg")] + [builtin_model("double-pq", p) for p in PQ_SAMPLE]
    for spec in specs:
        lab = spec.label()

        def run(spec=spec, lab=lab):
            res = []
            fit = D.det_expansion(spec, levels)
            pv, pl, logdet = D.printed_expansion(spec)
            for name, a, b in (("per-vertex", fit.per_vertex, pv), ("per-level", fit.per_level, pl),
                               ("constant", fit.constant, -logdet)):
                same = sympy.simplify(sympy.expand_log(a - b, force=True)) == 0
                res.append(exact(f"expansion.{lab}.{name}", f"fitted {name} coefficient equals the printed one",
                                 str(a) if same else str(a), str(a) if same else str(b)))
            with mpmath.workdps(50):
                cv, lv, ld = (mpmath.mpf(str(sympy.N(x, 50))) for x in (pv, pl, logdet))
                for n in levels:
                    lhs = D.discrete_det(spec, n, fit.kind).log(50)
                    rhs = cv * spec.vertex_count(n) + lv * n - ld
                    res.append(Check(f"expansion.{lab}.n{n}",
                                     f"log det - (c|V_n| + n b - log det L), {lab} level {n}",
                                     bool(abs(lhs - rhs) <= tol), lhs, rhs, tol))
            return res
        out += _guard(f"expansion.{lab}", "", run)
    cyc = builtin_model("double-pq", Fraction(1, 2))
    for n in levels:
        cid = f"expansion.double-pq(1/2).exact.n{n}"
        out += _guard(cid, "", lambda n=n, cid=cid: [exact(
            cid, f"det = 4*9^n exactly (log det = n log 9 + log 4), level {n}",
            D.discrete_det(cyc, n, "pq-weighted").to_fraction(), Fraction(4 * 9 ** n))])
    return out


# ---------------------------------------------------------------------------
# criterion 6: zeta identities

def _rel(cid, desc, lhs, rhs, tol=1e-6):
    return close(cid, desc, complex(lhs), complex(rhs), tol, relative=True)


def zeta_identity_checks(points=ZETA_POINTS, depth: int = 18, tol: float = IDENTITY_TOL) -> list:
    out = []
    dm = builtin_model("diamond").map
    sgm = builtin_model("double-sg").map
    pz = lambda rmap, w, s, mode="set": Z.poly_zeta(rmap, w, s, depth=depth, tolerance=tol, mode=mode).value
    for s in points:
        tag = f"s={s}"

        def diamond(s=s, tag=tag):
            u = 4 ** complex(s)
            z1, z2, z0 = pz(dm, -1, s), pz(dm, -2, s), pz(dm, 0, s)
            return [_rel(f"identity.diamond.zeta(-1).{tag}", "diamond zeta_{-1} = 4^s zeta_{-2}", z1, u * z2),
                    _rel(f"identity.diamond.zeta(-2).{tag}", "diamond zeta_{-2} = (4^s - 1) zeta_0", z2, (u - 1) * z0)]
        out += _guard(f"identity.diamond.{tag}", "", diamond)

        def gasket(s=s, tag=tag):
            u = 5 ** complex(s)
            return [_rel(f"identity.sg.zeta(-5).{tag}", "SG map zeta_{-5} = (5^s - 1) zeta_0",
                         pz(sgm, -5, s), (u - 1) * pz(sgm, 0, s))]
        out += _guard(f"identity.sg.{tag}", "", gasket)
        for p in PQ_SAMPLE:
            spec = builtin_model("double-pq", p)

            def pq(spec=spec, s=s, tag=tag):
                R, P, q = spec.map, spec.p, spec.q
                u = float(R.lam) ** complex(s)
                z = {w: pz(R, w, s, "multiset") for w in {-2 - 2 * q, -2 - 2 * P, -2 + 2 * q, -2 + 2 * P, 0, -4}}
                # at p = 1/2 the two children coincide and are counted twice
                a = z[-2 - 2 * q] + z[-2 - 2 * P] if P != q else 2 * z[-2 - 2 * q]
                b = z[-2 + 2 * q] + z[-2 + 2 * P] if P != q else 2 * z[-2 + 2 * q]
                lab = spec.label()
                return [_rel(f"identity.{lab}.zeta0.{tag}", "zeta_{-2-2q} + zeta_{-2-2p} = (lambda^s - 1) zeta_0",
                             a, (u - 1) * z[0]),
                        _rel(f"identity.{lab}.zeta-4.{tag}",
                             "zeta_{-2+2q} + zeta_{-2+2p} = (lambda^s - 1) zeta_{-4}", b, (u - 1) * z[-4])]
            out += _guard(f"identity.{spec.label()}.{tag}", "", pq)
    out += zeta_form_checks()
    out += truncation_checks(tol=tol, depth=depth)
    return out


def zeta_form_checks() -> list:
    """Printed closed forms against the forms rebuilt from the multiplicity schedules."""
    out = []
    pairs = [("diamond", None, "total", "reduced"), ("double-sg", None, "combined", "births"),
             ("double-sg", None, "total", "births"), ("sg", None, "neumann", "births"),
             ("double-pq", Fraction(3, 10), "total", "reduced"), ("double-pq", Fraction(1, 2), "total", "reduced"),
             ("pq", Fraction(3, 10), "neumann", "births")]
    for name, p, part, which in pairs:
        spec = builtin_model(name, p)
        cid = f"form.{spec.label()}.{part}"

        def run(spec=spec, part=part, which=which, cid=cid):
            pub = Z.published_form(spec, part)
            if part == "total" and spec.name == "diamond":
                # printed as a multiple of zeta_0: compare with the reduced form
                mine = Z.reduced_form(spec)
            else:
                mine = Z.births_form(spec) if which == "births" else Z.reduced_form(spec)
            return [exact(cid, f"printed {part} form equals the {which} form for {spec.label()}",
                          pub.equals(mine), True)]
        out += _guard(cid, "", run)
    dsg = builtin_model("double-sg")

    def combined_numeric():
        a = Z.evaluate_form(Z.published_form(dsg, "combined"), 2, tolerance=1e-13)
        b = Z.evaluate_form(Z.published_form(dsg, "total"), 2, tolerance=1e-13)
        return [close("form.double-sg.combined-vs-DN.s=2", "double-sg combined zeta vs Dirichlet + Neumann at s = 2",
                      a.value, b.value, 1e-10)]
    out += _guard("form.double-sg.combined-vs-DN", "", combined_numeric)
    return out


def truncation_checks(points=(2.0, 3.0), tol: float = 1e-12, depth: int = 40) -> list:
    out = []
    cases = [(builtin_model("diamond"), 12), (builtin_model("double-sg"), 9)]
    cases += [(builtin_model("double-pq", p), 8) for p in PQ_SAMPLE]
    for spec, level in cases:
        for s in points:
            cid = f"truncated.{spec.label()}.s={s}"

            def run(spec=spec, level=level, s=s, cid=cid):
                cf = Z.spectral_zeta_series(spec, s, tolerance=tol, depth=depth)
                tr = Z.spectral_zeta_truncated(spec, s, level)
                bound = cf.tail_bound + tr.tail_bound
                return [close(cid, f"closed-form zeta vs level-{level} eigenvalue sum within the combined tail bound",
                              cf.value, tr.value, bound)]
            out += _guard(cid, "", run)
    return out


# ---------------------------------------------------------------------------
# criterion 7: complexity constants

def complexity_checks(level: int = 8, tol: float = 1e-3) -> list:
    out = []
    for name in ("double-sg", "diamond"):
        spec = builtin_model(name)
        cid = f"complexity.{name}.n{level}"

        def run(spec=spec, cid=cid):
            res = D.complexity_constant(spec, levels=[level])
            emp = res.table[-1][1]
            return [close(cid, f"log tau / |V_n| at n = {level} vs {res.closed_form}", emp, res.value, tol)]
        out += _guard(cid, "", run)
    return out


# ---------------------------------------------------------------------------
# criterion 8: Mellin identity and the cycle product

def mellin_checks(points=(1.0, 1.5, 2.0), tol: float = 1e-8) -> list:
    out = []
    out.append(close("mellin.unit.s=1", "single eigenvalue 1 at s = 1", *Z.mellin_check([1], 1.0)[:2], tol))
    specs = [builtin_model("diamond"), builtin_model("sg"), builtin_model("double-sg"),
             builtin_model("pq", Fraction(3, 10)), builtin_model("double-pq", Fraction(1, 2)),
             builtin_model("double-pq", Fraction(3, 10))]
    for spec in specs:
        for n in (1, 2):
            sp = spectrum(spec, n)
            for s in points:
                cid = f"mellin.{spec.label()}.n{n}.s={s}"
                out += _guard(cid, "", lambda sp=sp, s=s, cid=cid: [close(
                    cid, "Gamma(s) sum lambda^-s vs heat-trace Mellin quadrature",
                    *Z.mellin_check(sp, s)[:2], tol)])
    return out


def cosine_checks(levels=range(0, 11)) -> list:
    out = []
    for n in levels:
        prod, expected = Z.cosine_product_check(n)
        out.append(close(f"cosine.n{n}", f"prod (2 - 2cos(2 pi k/N)), N = 2*3^{n}, equals 4*3^(2n)",
                         prod, mpmath.mpf(expected), 1e-9 * expected))
    return out


# ---------------------------------------------------------------------------
# criterion 9: pole lines

def pole_checks() -> list:
    cases = [(builtin_model("diamond"), [sympy.Integer(1)]),
             (builtin_model("double-sg"), [sympy.log(3) / sympy.log(5)])]
    for p in PQ_SAMPLE:
        spec = builtin_model("double-pq", p)
        cases.append((spec, [sympy.log(3) / sympy.log(sympy.Rational(spec.map.lam.numerator,
                                                                      spec.map.lam.denominator))]))
    out = []
    for spec, expected in cases:
        cid = f"poles.{spec.label()}"

        def run(spec=spec, expected=expected, cid=cid):
            ps = Z.complex_dimensions(spec)
            got = sorted(ps.real_parts(), key=float)
            same = len(got) == len(expected) and all(sympy.simplify(a - b) == 0 for a, b in zip(got, expected))
            cancelled0 = any(sympy.simplify(c.real_part) == 0 for c in ps.cancelled)
            return [exact(cid + ".lines", f"surviving pole lines of {spec.label()}",
                          [str(x) for x in got] if same else [str(x) for x in got],
                          [str(x) for x in got] if same else [str(x) for x in expected]),
                    exact(cid + ".imaginary-axis", "no line on Re(s) = 0", ps.has_imaginary_axis_line(), False),
                    exact(cid + ".cancelled", "the Re(s) = 0 candidate is listed as cancelled", cancelled0, True)]
        out += _guard(cid, "", run)
    return out


# ---------------------------------------------------------------------------

CRITERIA = {
    1: ("oracle spectrum equivalence", oracle_spectrum_checks),
    2: ("determinant closed forms", determinant_checks),
    3: ("spanning trees", spanning_tree_checks),
    4: ("regularized determinants", regdet_checks),
    5: ("corollary expansions", expansion_checks),
    6: ("zeta identity suite", zeta_identity_checks),
    7: ("complexity constants", complexity_checks),
    8: ("Mellin finite-sum identity", mellin_checks),
    9: ("pole structure", pole_checks),
}

SUITES = {
    "oracle": (oracle_spectrum_checks, determinant_oracle_checks),
    "identities": (zeta_identity_checks, regdet_checks, pole_checks),
    "corollaries": (determinant_closed_form_checks, spanning_tree_checks, expansion_checks, complexity_checks),
    "mellin": (mellin_checks, cosine_checks),
}


def run_suite(name: str) -> VerifyReport:
    if name == "all":
        groups = [g for key in ("oracle", "identities", "corollaries", "mellin") for g in SUITES[key]]
    elif name in SUITES:
        groups = SUITES[name]
    else:
        raise ValueError(f"unknown suite {name!r}")
    report = VerifyReport(name)
    for g in groups:
        report.checks.extend(g())
    return report
