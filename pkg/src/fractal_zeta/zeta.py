"""Polynomial and spectral zeta functions, regularized determinants, pole lines.

Spectral zeta functions are handled as *forms*: finite sums of
``coefficient(u) * zeta_w(s)`` with ``u = lambda**s``, where each zeta_w is the
polynomial zeta function of the decimation map at a seed value w.  A form is
built from the multiplicity schedules of the primitive seeds (births form)
and then rewritten with two identities that follow from the map alone:

* if every root of R(z) = R(w) equals w, then zeta_w = u * zeta_{R(w)};
* if f = R(f) and C = R^{-1}(f) minus f, then sum_{c in C} zeta_c = (u - 1) zeta_f.

Rewriting stops once no coefficient is singular at u = 1 (s = 0).  The
derivative at 0 then only needs the closed values of zeta_w and zeta_w' at 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import sympy

from .decimation import SpectrumMultiset, preimage_tree, preimages, working_dps
from .models import ModelSpec, RationalMap, fraction_str

U = sympy.Symbol("u")
SERIES_CAP = 3 ** 15
DEFAULT_TOL = 1e-12


def _rat(x) -> sympy.Rational:
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


# ---------------------------------------------------------------------------
# polynomial zeta series

@dataclass(frozen=True)
class SeriesEval:
    value: complex
    depth: int
    tail_bound: float
    converged: bool


def divergence_abscissa(rmap: RationalMap) -> float:
    return math.log(rmap.degree) / math.log(float(rmap.lam))


def _float_coeffs(rmap: RationalMap):
    if len(rmap.denominator_coeffs) != 1:
        raise ValueError("series evaluation needs a polynomial map")
    q0 = float(rmap.denominator_coeffs[0])
    return [float(c) / q0 for c in rmap.numerator_coeffs]


def _polish(c, z, x, iters=3):
    # Newton on P(z) - x, vectorised
    d = len(c) - 1
    for _ in range(iters):
        f = np.full_like(z, c[d])
        fp = np.zeros_like(z)
        for k in range(d - 1, -1, -1):
            fp = fp * z + f
            f = f * z + c[k]
        f = f - x
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(fp != 0, f / fp, 0.0)
        z = z - step
    return z


def _critical_polish(c, z, iters=4):
    # Newton on P'(z): a double root of P - x is a critical point of P
    dc = [k * c[k] for k in range(1, len(c))]
    return _polish(dc, z, 0.0, iters)


def _children(c, x):
    """All real roots of P(z) = x for an array x of nonzero values.

    Returns (roots, mult) arrays of shape (len(x), d).  Roots that coincide
    are reported once with multiplicity 2 and once with multiplicity 0.
    """
    d = len(c) - 1
    n = x.shape[0]
    if d == 2:
        c0 = -x
        c1, c2 = c[1], c[2]
        disc = c1 * c1 - 4 * c2 * c0
        if np.any(disc < -1e-12 * (c1 * c1 + np.abs(4 * c2 * c0))):
            raise ArithmeticError("complex preimages encountered")
        sq = np.sqrt(np.maximum(disc, 0.0))
        qq = -(c1 + math.copysign(1.0, c1) * sq) / 2
        r1 = qq / c2
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(qq != 0, c0 / qq, r1)
        roots = np.stack([r1, r2], axis=1)
    elif d == 3:
        a, b, cc = c[2] / c[3], c[1] / c[3], (c[0] - x) / c[3]
        # depressed cubic t^3 + p t + q with z = t - a/3 (Viete, three real roots)
        p = b - a * a / 3
        q = 2 * a ** 3 / 27 - a * b / 3 + cc
        if p >= 0:
            raise ArithmeticError("cubic preimages are not all real")
        m = 2 * math.sqrt(-p / 3)
        arg = np.clip(3 * q / (p * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3
        roots = np.stack([m * np.cos(theta - 2 * math.pi * k / 3) for k in range(3)], axis=1) - a / 3
        roots = _polish(c, roots, x[:, None], iters=4)
    else:
        raise ValueError("degree must be 2 or 3")
    roots.sort(axis=1)
    mult = np.ones((n, d), dtype=np.int64)
    scale = 1.0 + np.abs(roots)
    for j in range(d - 1):
        close = np.abs(roots[:, j + 1] - roots[:, j]) <= 1e-6 * scale[:, j]
        if np.any(close):
            mid = _critical_polish(c, (roots[close, j] + roots[close, j + 1]) / 2)
            roots[close, j] = mid
            roots[close, j + 1] = mid
            mult[close, j] += mult[close, j + 1]
            mult[close, j + 1] = 0
    return roots, mult


def _zero_children(rmap: RationalMap):
    """Nonzero roots of R(z) = 0 with multiplicity (double precision)."""
    out = []
    for z, m in preimages(rmap, Fraction(0), None, with_multiplicity=True):
        if abs(z) > 1e-14:
            out.append((float(z), m))
    return out


def _level_sums(rmap: RationalMap, w, s: complex, max_depth: int, mode: str, cap: int):
    """Yield (depth, partial sum) for depths 0..max_depth (double precision)."""
    c = _float_coeffs(rmap)
    d = rmap.degree
    loglam = math.log(float(rmap.lam))
    is_zero = Fraction(w) == 0 if isinstance(w, (int, Fraction)) else w == 0
    vals = np.array([] if is_zero else [float(w)], dtype=float)
    wts = np.array([] if is_zero else [1.0], dtype=float)
    zero_kids = _zero_children(rmap) if is_zero else []
    for depth in range(max_depth + 1):
        if depth > 0:
            if vals.size:
                roots, mult = _children(c, vals)
                if mode == "set":
                    m = (mult > 0).astype(float)
                else:
                    m = mult.astype(float)
                nw = (wts[:, None] * m).ravel()
                nv = roots.ravel()
                keep = nw > 0
                vals, wts = nv[keep], nw[keep]
            if is_zero:
                zv = np.array([z for z, _ in zero_kids])
                zw = np.array([1.0 if mode == "set" else float(k) for _, k in zero_kids])
                vals = np.concatenate([vals, zv])
                wts = np.concatenate([wts, zw])
        if vals.size > cap:
            return  # node cap reached: the caller reports converged = False
        logmu = depth * loglam + np.log(-vals)
        total = complex(np.sum(wts * np.exp(-s * logmu)))
        yield depth, total


def _poly_zeta_mp(rmap, w, s, depth, mode, dps):
    with mpmath.workdps(dps):
        tree = preimage_tree(rmap, w, depth, dps)
        lam = mpmath.mpf(rmap.lam.numerator) / rmap.lam.denominator
        sums = []
        for k, level in enumerate(tree):
            tot = mpmath.mpc(0)
            seen = []
            for node in level:
                if node.value == 0:
                    continue
                wt = node.multiplicity if mode == "multiset" else 1
                if mode == "set":
                    if any(abs(node.value - v) <= mpmath.mpf(10) ** (-dps // 2) for v in seen):
                        continue
                    seen.append(node.value)
                tot += wt * mpmath.exp(-s * (k * mpmath.log(lam) + mpmath.log(-node.value)))
            sums.append(complex(tot))
        return sums


def poly_zeta(rmap: RationalMap, w, s, depth: int = 40, tolerance: float = DEFAULT_TOL,
              margin: float = 0.05, mode: str = "set", stop_early: bool = True,
              cap: int = SERIES_CAP, precision=None) -> SeriesEval:
    """Sum of mu^(-s) over mu = -lambda^n z, z in R^{-n}(w), as n grows.

    ``depth`` is the largest depth evaluated; with ``stop_early`` the loop ends
    as soon as the differences have decayed geometrically below ``tolerance``.
    If the preimage count would pass ``cap`` first, the last complete depth is
    returned with ``converged = False``.
    ``mode`` decides whether repeated roots count once ("set") or with their
    multiplicity ("multiset").
    """
    s = complex(s)
    if mode not in ("set", "multiset"):
        raise ValueError("mode must be 'set' or 'multiset'")
    w = Fraction(w) if isinstance(w, (int, Fraction, str)) else w
    if float(w) > 0:
        raise ValueError("seed values must be non-positive")
    sigma0 = divergence_abscissa(rmap)
    if s.real <= sigma0 + margin:
        raise ValueError(f"Re(s) = {s.real} is not beyond the divergence abscissa "
                         f"{sigma0:.6f} + margin {margin}")
    lam = float(rmap.lam)
    r = max(rmap.degree * lam ** (-s.real), 1 / lam)
    if precision is not None:
        sums = _poly_zeta_mp(rmap, w, s, depth, mode, precision)
        it = enumerate(sums)
    else:
        it = _level_sums(rmap, w, s, depth, mode, cap)
    prev = None
    diffs = []
    value = 0j
    used = 0
    converged = False
    tail = float("inf")
    for k, total in it:
        value, used = total, k
        if prev is not None:
            diffs.append(abs(total - prev))
        prev = total
        if len(diffs) >= 3:
            ratios = [b / a if a > 0 else 0.0 for a, b in zip(diffs[-3:], diffs[-2:])]
            rho = min(max([r] + ratios), 0.999)
            tail = diffs[-1] * rho / (1 - rho)
            geometric = all(x < 1 for x in ratios) or diffs[-1] == 0
            converged = geometric and diffs[-1] <= tolerance and tail <= tolerance
            if converged and stop_early:
                break
    if len(diffs) < 3:
        tail = diffs[-1] * r / (1 - r) if diffs else float("inf")
    return SeriesEval(value=value, depth=used, tail_bound=float(tail), converged=converged)


def leading_coefficient(rmap: RationalMap) -> Fraction:
    if len(rmap.denominator_coeffs) != 1:
        raise ValueError("closed values at 0 need a polynomial map")
    return rmap.numerator_coeffs[-1] / rmap.denominator_coeffs[0]


def poly_zeta_at0(rmap: RationalMap, w):
    """(zeta_w(0), zeta_w'(0)) in closed form; the derivative is a sympy expression."""
    w = Fraction(w)
    if w > 0:
        raise ValueError("w > 0 is not supported")
    ad = _rat(leading_coefficient(rmap))
    base = sympy.log(ad) / (rmap.degree - 1)
    if w == 0:
        return 1, sympy.expand_log(base, force=True)
    return 0, sympy.expand_log(base + sympy.log(_rat(-w)), force=True)


# ---------------------------------------------------------------------------
# zeta forms

@dataclass(frozen=True)
class ZetaTerm:
    coeff: object  # sympy rational function of U
    w: Fraction
    mode: str = "set"

    def __str__(self):
        return f"[{sympy.factor(self.coeff)}] * zeta_{{{fraction_str(self.w)}}}"


@dataclass(frozen=True)
class ZetaForm:
    terms: tuple
    rmap: RationalMap
    description: str = ""
    steps: tuple = ()
    factors: tuple = ()  # (u0, factor string) used during rewriting

    @property
    def lam(self) -> Fraction:
        return self.rmap.lam

    def coefficient(self, w, mode=None):
        tot = sympy.Integer(0)
        for t in self.terms:
            if t.w == Fraction(w) and (mode is None or t.mode == mode):
                tot += t.coeff
        return sympy.cancel(tot)

    def seeds(self):
        return sorted({t.w for t in self.terms})

    def singular_at_one(self) -> list:
        return [t for t in self.terms if _has_pole(t.coeff, 1)]

    def __str__(self):
        return " + ".join(str(t) for t in self.terms)

    def equals(self, other: "ZetaForm") -> bool:
        keys = {(t.w, t.mode) for t in self.terms} | {(t.w, t.mode) for t in other.terms}
        return all(sympy.simplify(self.coefficient(w, m) - other.coefficient(w, m)) == 0 for w, m in keys)


def _has_pole(expr, u0) -> bool:
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    return sympy.Poly(den, U).eval(u0) == 0


def _combine(terms) -> tuple:
    acc = {}
    order = []
    for t in terms:
        key = (t.w, t.mode)
        if key not in acc:
            acc[key] = sympy.Integer(0)
            order.append(key)
        acc[key] += t.coeff
    out = []
    for key in order:
        c = sympy.cancel(sympy.together(acc[key]))
        if c != 0:
            out.append(ZetaTerm(c, key[0], key[1]))
    return tuple(sorted(out, key=lambda t: (t.w, t.mode)))


def births_form(spec: ModelSpec) -> ZetaForm:
    """sum over primitive seeds of (sum_m b(m) u^-m) * zeta_seed."""
    terms = []
    for s in spec.primitive_seeds():
        terms.append(ZetaTerm(s.schedule.law.generating_function(U), s.value, "set"))
    return ZetaForm(_combine(terms), spec.map, description=f"births form of {spec.label()}")


def _exact_preimages(rmap: RationalMap, v: Fraction):
    """Rational roots of R(z) = v with multiplicity, and whether they exhaust all d roots."""
    z = sympy.Symbol("z")
    coeffs = rmap.preimage_polynomial(v)
    poly = sympy.Poly(sum(_rat(c) * z ** i for i, c in enumerate(coeffs)), z)
    rts = sympy.roots(poly, filter="Q")
    out = [(Fraction(int(r.p), int(r.q)), int(m)) for r, m in rts.items()]
    return sorted(out), sum(m for _, m in out) == poly.degree()


def _factor_name(lam: Fraction, u0) -> str:
    base = fraction_str(lam)
    base = base if "/" not in base else f"({base})"
    return f"({base}^s - {u0})"


def reduce_form(form: ZetaForm, max_steps: int = 50) -> ZetaForm:
    terms = list(form.terms)
    rmap = form.rmap
    steps = list(form.steps)
    factors = list(form.factors)
    for _ in range(max_steps):
        bad = [t for t in terms if _has_pole(t.coeff, 1)]
        if not bad:
            break
        progressed = False
        for t in bad:
            img = rmap(t.w)
            pre, complete = _exact_preimages(rmap, img)
            if complete and len(pre) == 1 and pre[0][0] == t.w:
                terms.remove(t)
                terms.append(ZetaTerm(sympy.cancel(U * t.coeff), img, t.mode))
                steps.append(f"zeta_{{{fraction_str(t.w)}}} = lambda^s zeta_{{{fraction_str(img)}}}")
                factors.append((0, "lambda^s"))
                progressed = True
                break
            if rmap(img) == img and img != t.w and complete:
                kids = [(c, m) for c, m in pre if c != img]
                if any(c == img for c, m in pre if m > 1):
                    continue
                mode = "multiset" if any(m > 1 for _, m in kids) else t.mode
                per = []
                for c, m in kids:
                    coeff = sum((x.coeff for x in terms if x.w == c), sympy.Integer(0))
                    per.append(sympy.cancel(coeff / (m if mode == "multiset" else 1)))
                if any(sympy.simplify(x - per[0]) != 0 for x in per[1:]) or per[0] == 0:
                    continue
                h = per[0]
                terms = [x for x in terms if x.w not in {c for c, _ in kids}]
                terms.append(ZetaTerm(sympy.cancel((U - 1) * h), img, mode))
                names = " + ".join(f"zeta_{{{fraction_str(c)}}}" + (f"*{m}" if mode == "multiset" and m > 1 else "")
                                   for c, m in kids)
                steps.append(f"{names} = (lambda^s - 1) zeta_{{{fraction_str(img)}}}")
                factors.append((1, _factor_name(rmap.lam, 1)))
                progressed = True
                break
        terms = list(_combine(terms))
        if not progressed:
            break
    return ZetaForm(_combine(terms), rmap, description=form.description + " (reduced)",
                    steps=tuple(steps), factors=tuple(factors))


def reduced_form(spec: ModelSpec) -> ZetaForm:
    return reduce_form(births_form(spec))


def _ratfun(expr):
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    pn = [complex(c) for c in sympy.Poly(num, U).all_coeffs()]
    pd = [complex(c) for c in sympy.Poly(den, U).all_coeffs()]
    return pn, pd


def _horner(cs, x):
    acc = 0j
    for c in cs:
        acc = acc * x + c
    return acc


def eval_coefficient(expr, u: complex) -> complex:
    pn, pd = _ratfun(expr)
    den = _horner(pd, u)
    scale = sum(abs(c) * abs(u) ** k for k, c in enumerate(reversed(pd)))
    if abs(den) <= 1e-12 * scale:
        raise ValueError(f"s is at a pole of the geometric factor (u = {u})")
    return _horner(pn, u) / den


def evaluate_form(form: ZetaForm, s, tolerance: float = DEFAULT_TOL, depth: int = 40,
                  stop_early: bool = True, precision=None) -> SeriesEval:
    s = complex(s)
    u = cmath.exp(s * math.log(float(form.lam)))
    value, tail, used, ok = 0j, 0.0, 0, True
    for t in form.terms:
        g = eval_coefficient(t.coeff, u)
        z = poly_zeta(form.rmap, t.w, s, depth=depth, tolerance=tolerance, mode=t.mode,
                      stop_early=stop_early, precision=precision)
        value += g * z.value
        tail += abs(g) * z.tail_bound
        used = max(used, z.depth)
        ok = ok and z.converged
    return SeriesEval(value, used, tail, ok)


def _default_form(spec: ModelSpec) -> ZetaForm:
    red = reduced_form(spec)
    return red if not red.singular_at_one() else births_form(spec)


def spectral_zeta_series(spec: ModelSpec, s, tolerance: float = DEFAULT_TOL, depth: int = 40,
                         form: ZetaForm | None = None) -> SeriesEval:
    return evaluate_form(form or _default_form(spec), s, tolerance, depth)


def spectral_zeta(spec: ModelSpec, s, tolerance: float = DEFAULT_TOL, depth: int = 40) -> complex:
    return spectral_zeta_series(spec, s, tolerance, depth).value


def truncated_sum(spec: ModelSpec, s, level: int, precision=None) -> complex:
    """sum of mu^-s over the level-n spectrum, mu = -lambda^n z (zero excluded)."""
    from .decimation import spectrum
    s = complex(s)
    sp = spectrum(spec, level, precision=precision)
    loglam = math.log(float(spec.map.lam))
    tot = 0j
    for e in sp.entries:
        if e.value == 0:
            continue
        # the fixed (non-iterated) seeds have mu = lambda^n |w| -> they contribute too
        lm = level * loglam + math.log(-float(e.value))
        tot += e.multiplicity * cmath.exp(-s * lm)
    return tot


@dataclass(frozen=True)
class TruncatedEval:
    value: complex
    level: int
    tail_bound: float


def spectral_zeta_truncated(spec: ModelSpec, s, level: int, precision=None) -> TruncatedEval:
    """Level-``level`` eigenvalue sum with a tail estimate from the last three levels.

    The error ratio approaches max(d lambda^-Re s, 1/lambda) from above, so the
    larger of that and the observed ratio is used, with a factor 2 margin.
    """
    if level < 2:
        raise ValueError("need level >= 2 for a tail estimate")
    s = complex(s)
    a, b, c = (truncated_sum(spec, s, k, precision) for k in (level - 2, level - 1, level))
    lam = float(spec.map.lam)
    r = max(spec.map.degree * lam ** (-s.real), 1 / lam)
    d1, d2 = abs(b - a), abs(c - b)
    rho = min(max(r, d2 / d1 if d1 else 0.0), 0.95)
    return TruncatedEval(c, level, 2 * d2 * rho / (1 - rho))


# ---------------------------------------------------------------------------
# printed forms

def _u(expr_str: str):
    return sympy.sympify(expr_str, locals={"u": U})


def published_form(spec: ModelSpec, part: str = "total") -> ZetaForm:
    """Closed forms as printed: diamond "total", sg "dirichlet"/"neumann",
    double-sg "combined"/"total" (=D+N), pq "neumann", double-pq "total"."""
    R = spec.map
    terms = []
    name = spec.name
    if name == "diamond" and part == "total":
        terms = [ZetaTerm(_u("u*(u-1)/3*(4/(u-4)+2/(u-1))"), Fraction(0))]
    elif name in ("sg", "double-sg") and part == "dirichlet":
        terms = [ZetaTerm(_u("1/u"), Fraction(-2)),
                 ZetaTerm(_u("(3/(2*(u-3)) - 3/(2*(u-1)))/u"), Fraction(-3)),
                 ZetaTerm(_u("1/(2*(u-3)) + 3/(2*(u-1))"), Fraction(-5))]
    elif name in ("sg", "double-sg") and part == "neumann":
        terms = [ZetaTerm(_u("1/(2*(u-3)) + 3/(2*(u-1))"), Fraction(-3)),
                 ZetaTerm(_u("3/(2*u*(u-3)) - 1/(2*u*(u-1))"), Fraction(-5))]
    elif name == "double-sg" and part == "combined":
        terms = [ZetaTerm(_u("1/u"), Fraction(-2)),
                 ZetaTerm(_u("(3+u)/(2*u*(u-3)) + 3/(2*u)"), Fraction(-3)),
                 ZetaTerm(_u("(u+3)/(2*u*(u-3)) + (3*u-1)/(2*u*(u-1))"), Fraction(-5))]
    elif name == "double-sg" and part == "total":
        d = published_form(spec, "dirichlet")
        n = published_form(spec, "neumann")
        return ZetaForm(_combine(d.terms + n.terms), R, "Dirichlet + Neumann")
    elif name == "pq" and part == "neumann":
        q = spec.q
        terms = [ZetaTerm(_u("1/(u-1)"), -2 - 2 * q), ZetaTerm(_u("1/(u-1)"), -2 + 2 * q)]
    elif name == "double-pq" and part == "total":
        # repeated preimages (counted with multiplicity) only occur at p = 1/2
        mode = "multiset" if spec.p == spec.q else "set"
        terms = [ZetaTerm(sympy.Integer(1), Fraction(0), mode),
                 ZetaTerm(sympy.Integer(1), Fraction(-4), mode)]
    else:
        raise ValueError(f"no printed form {part!r} for {spec.name}")
    return ZetaForm(_combine(terms), R, f"{spec.name} {part}")


# ---------------------------------------------------------------------------
# regularized determinant

@dataclass(frozen=True)
class RegularizedDet:
    zeta_at_0: object
    zeta_prime_at_0: object
    closed_form: object
    form: ZetaForm

    @property
    def value(self):
        return self.closed_form

    def decimal(self, digits: int = 30) -> str:
        return str(sympy.N(self.closed_form, digits))

    def __float__(self):
        return float(self.closed_form)

    def power_string(self) -> str:
        """e.g. "2^(-10/9)" or "2^(-1) * 3^(-1/2) * 5^(1/2)"."""
        from .determinants import log_vector
        try:
            vec = log_vector(self.zeta_prime_at_0)
        except ValueError:
            return str(self.closed_form)
        parts = [f"{pr}^{-c}" if (-c).denominator == 1 and c < 0 else f"{pr}^({fraction_str(-c)})"
                 for pr, c in sorted(vec.items()) if c != 0]
        return " * ".join(parts) if parts else "1"


def _exp_neg(expr):
    from .determinants import log_vector
    try:
        vec = log_vector(expr)
    except ValueError:
        return sympy.exp(-expr)
    return sympy.Mul(*[sympy.Integer(pr) ** (-_rat(c)) for pr, c in vec.items()])


def zeta_derivative_at0(form: ZetaForm):
    """(zeta(0), zeta'(0)) from G(1), G'(1) log lambda and the closed values at 0."""
    loglam = sympy.log(_rat(form.lam))
    z0 = sympy.Integer(0)
    z1 = sympy.Integer(0)
    for t in form.terms:
        if _has_pole(t.coeff, 1):
            raise ValueError("coefficient singular at s = 0: poles on the imaginary axis remain")
        g1 = sympy.cancel(t.coeff).subs(U, 1)
        dg1 = sympy.cancel(sympy.diff(t.coeff, U)).subs(U, 1)
        v0, d0 = poly_zeta_at0(form.rmap, t.w)
        z0 += g1 * v0
        z1 += dg1 * loglam * v0 + g1 * d0
    return sympy.nsimplify(z0), sympy.expand(sympy.expand_log(z1, force=True))


def regularized_det(spec: ModelSpec) -> RegularizedDet:
    red = reduced_form(spec)
    if red.singular_at_one():
        raise ValueError(f"{spec.label()}: the spectral zeta function keeps poles on the imaginary "
                         f"axis, so no regularized determinant is defined")
    z0, z1 = zeta_derivative_at0(red)
    return RegularizedDet(z0, z1, _exp_neg(z1), red)


# ---------------------------------------------------------------------------
# pole lines

@dataclass(frozen=True)
class PoleLine:
    real_part: object  # sympy
    spacing: object  # sympy, imaginary period
    origin: str  # "geometric factor" or "polynomial zeta"
    factor: str = ""
    reason: str = ""

    def to_dict(self, digits: int = 20) -> dict:
        d = {
            "real_part": str(self.real_part),
            "real_part_decimal": _num(self.real_part, digits),
            "spacing": str(self.spacing),
            "spacing_decimal": _num(self.spacing, digits),
            "origin": self.origin,
        }
        if self.factor:
            d["factor"] = self.factor
        if self.reason:
            d["reason"] = self.reason
        return d


def _num(expr, digits):
    return mpmath.nstr(mpmath.mpf(sympy.N(expr, digits + 5)), digits, strip_zeros=False)


@dataclass(frozen=True)
class PoleSet:
    model: str
    lines: tuple
    cancelled: tuple
    reduced: bool

    def real_parts(self) -> list:
        return [l.real_part for l in self.lines]

    def has_imaginary_axis_line(self) -> bool:
        return any(sympy.simplify(l.real_part) == 0 for l in self.lines)

    def to_dict(self, digits: int = 20) -> dict:
        return {"model": self.model, "reduced": self.reduced,
                "lines": [l.to_dict(digits) for l in self.lines],
                "cancelled": [l.to_dict(digits) for l in self.cancelled]}


def _denominator_roots(expr) -> list:
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    out = []
    for r in sympy.roots(sympy.Poly(den, U)).keys():
        if r != 0:
            out.append(sympy.nsimplify(r))
    return out


def complex_dimensions(spec: ModelSpec) -> PoleSet:
    births = births_form(spec)
    red = reduce_form(births)
    lam = _rat(spec.map.lam)
    loglam = sympy.log(lam)
    spacing = 2 * sympy.pi / loglam

    def line_at(u0):
        return sympy.simplify(sympy.log(sympy.Abs(u0)) / loglam)

    before = set()
    for t in births.terms:
        before.update(_denominator_roots(t.coeff))
    after = set()
    for t in red.terms:
        after.update(_denominator_roots(t.coeff))
    lines, cancelled = [], []
    for u0 in sorted(after, key=lambda x: float(x)):
        lines.append(PoleLine(line_at(u0), spacing, "geometric factor", factor=_factor_name(spec.map.lam, u0)))
    for u0 in sorted(before - after, key=lambda x: float(x)):
        cancelled.append(PoleLine(line_at(u0), spacing, "geometric factor",
                                  factor=_factor_name(spec.map.lam, u0),
                                  reason="cancelled by the zero of the factor produced in the reduction"
                                  if any(f_u == u0 for f_u, _ in red.factors) else
                                  "cancelled in the rewritten coefficients"))
    d = spec.map.degree
    poly_re = sympy.simplify(sympy.log(d) / loglam)
    reduced_ok = not red.singular_at_one()
    zeros_everywhere = all(sympy.cancel(t.coeff).subs(U, d) == 0 for t in red.terms)
    ds_half = sympy.simplify(spec.spectral_dimension_expr / 2)
    if zeros_everywhere:
        cancelled.append(PoleLine(poly_re, spacing, "polynomial zeta", factor=_factor_name(spec.map.lam, d),
                                  reason="every geometric coefficient vanishes at lambda^s = d"))
    elif reduced_ok and sympy.simplify(poly_re - ds_half) != 0:
        cancelled.append(PoleLine(poly_re, spacing, "polynomial zeta", factor="",
                                  reason="without imaginary-axis poles the pole set is confined to "
                                         "Re(s) = d_s/2"))
    else:
        lines.append(PoleLine(poly_re, spacing, "polynomial zeta"))
    lines.sort(key=lambda l: float(l.real_part))
    return PoleSet(spec.label(), tuple(lines), tuple(cancelled), reduced_ok)


# ---------------------------------------------------------------------------
# finite checks

def _pairs(spectrum_like):
    if isinstance(spectrum_like, SpectrumMultiset):
        return [(mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v), m)
                for v, m in spectrum_like.nonzero()]
    out = []
    for item in spectrum_like:
        if isinstance(item, tuple):
            v, m = item
        else:
            v, m = item, 1
        v = mpmath.mpf(Fraction(v).numerator) / Fraction(v).denominator if isinstance(v, (int, Fraction)) \
            else mpmath.mpf(v)
        if v != 0:
            out.append((v, m))
    return out


def mellin_check(spectrum_like, s: float, tol: float = 1e-8, dps: int = 30):
    """Gamma(s) sum lambda^-s against the quadrature of the heat trace Mellin integral."""
    if s <= 0:
        raise ValueError("s must be positive")
    with mpmath.workdps(dps):
        pairs = _pairs(spectrum_like)
        if not pairs:
            raise ValueError("spectrum has no nonzero eigenvalues")
        if any(v <= 0 for v, _ in pairs):
            raise ValueError("nonzero eigenvalues must be positive")
        s_mp = mpmath.mpf(s)
        lhs = mpmath.gamma(s_mp) * mpmath.fsum(m * v ** (-s_mp) for v, m in pairs)
        f = lambda t: mpmath.fsum(m * mpmath.exp(-v * t) for v, m in pairs) * t ** (s_mp - 1)
        vs = sorted(v for v, _ in pairs)
        pts = [mpmath.mpf(0)] + sorted({1 / v for v in vs}) + [40 / vs[0], mpmath.inf]
        rhs, err = mpmath.quad(f, pts, error=True, maxdegree=10)
        if err > tol:
            raise ArithmeticError(f"quadrature did not converge (error estimate {err})")
        return lhs, rhs, abs(lhs - rhs)


def cosine_product_check(n: int, dps: int = 40):
    """prod_{k=1}^{N-1} (2 - 2 cos(2 pi k / N)) for N = 2*3^n, against 4*3^(2n)."""
    if n < 0 or n > 10:
        raise ValueError("n must lie in 0..10")
    N = 2 * 3 ** n
    with mpmath.workdps(dps):
        # 2 - 2 cos(2x) = 4 sin(x)^2 avoids cancellation near k = 0, N
        logs = mpmath.fsum(mpmath.log(4 * mpmath.sin(mpmath.pi * k / N) ** 2) for k in range(1, N))
        product = mpmath.exp(logs)
    return product, 4 * 3 ** (2 * n)
