"""fractal-zeta command line.

    fractal-zeta graph    --model sg --level 2 [--format csv|json|matrix --kind K]
    fractal-zeta spectrum --model diamond --level 3 [--kind K] [--format csv|json]
    fractal-zeta det      --model double-sg --level 4 [--kind K] [--from 1] [--format csv|json]
    fractal-zeta trees    --model double-sg --level 2
    fractal-zeta zeta     --model double-pq --p 1/2 --s "2+1i" [--depth D --tol T]
    fractal-zeta regdet   --model double-sg
    fractal-zeta poles    --model diamond
    fractal-zeta verify   --suite all
    fractal-zeta catalog

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import mpmath

from . import determinants as D
from . import zeta as Z
from .decimation import spectrum, spectrum_csv, spectrum_dict
from .graphs import build_graph, edges_csv, graph_dict, laplacian, matrix_coordinate_text
from .models import MODEL_NAMES, as_fraction, builtin_model, catalog_json, fraction_str
from .verify import run_suite

DIGITS = 20


class UsageError(Exception):
    pass


def real_str(x, digits: int = DIGITS) -> str:
    return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False)


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r} (use a+bi)") from None


def _dump(payload: dict) -> str:
    return json.dumps(dict(schema=1, **payload), indent=2) + "\n"


def _spec(args):
    p = None
    if getattr(args, "p", None) is not None:
        try:
            p = as_fraction(args.p)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse p = {args.p!r}") from None
    return builtin_model(args.model, p)


# ---------------------------------------------------------------------------

def cmd_graph(args) -> str:
    spec = _spec(args)
    g = build_graph(spec, args.level)
    if args.format == "csv":
        return edges_csv(g)
    if args.format == "matrix":
        return matrix_coordinate_text(laplacian(g, args.kind or "combinatorial"))
    d = graph_dict(g)
    d["model"] = spec.label()
    return _dump(d)


def cmd_spectrum(args) -> str:
    spec = _spec(args)
    sp = spectrum(spec, args.level, kind=args.kind)
    if args.format == "csv":
        return spectrum_csv(sp, DIGITS)
    d = spectrum_dict(sp, DIGITS)
    d.pop("schema", None)
    return _dump(d)


def _trees_or_none(spec, n):
    try:
        return D.spanning_trees(spec, n)
    except ValueError:
        return None


def _det_row(spec, n, kind):
    fr = D.discrete_det(spec, n, kind)
    verts = spec.vertex_count(n)
    tau = _trees_or_none(spec, n) if n >= 1 else None
    row = {"n": n, "vertices": verts, "det": str(fr), "det_decimal": real_str(fr.value(40))}
    # the exact rational is only printed while it stays short
    size = sum(abs(e) for _, e in fr.to_primes().factors)
    row["det_exact"] = fraction_str(fr.to_fraction()) if size <= 200 else None
    row["trees"] = None if tau is None else str(tau)
    row["log_trees_per_vertex"] = None if tau is None else real_str(mpmath.log(tau) / verts)
    return row


def cmd_det(args) -> str:
    spec = _spec(args)
    kind = args.kind or spec.laplacian_kind
    first = args.level if args.start is None else args.start
    if first > args.level:
        raise UsageError("--from must not exceed --level")
    rows = [_det_row(spec, n, kind) for n in range(first, args.level + 1)]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "vertices", "det", "det_decimal", "trees", "log_trees_per_vertex"],
                           extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
        return buf.getvalue()
    payload = {"model": spec.label(), "kind": kind, "rows": rows}
    if spec.name in ("double-sg", "double-pq") and kind == {"double-sg": "combinatorial",
                                                            "double-pq": "pq-weighted"}[spec.name]:
        fit = D.det_expansion(spec)
        rd = Z.regularized_det(spec)
        a, b, c = fit.values(DIGITS + 5)
        logdet = mpmath.log(mpmath.mpf(str(rd.decimal(40))))
        # both signed readings of the constant term are reported
        payload["expansion"] = {
            "per_vertex": str(fit.per_vertex), "per_vertex_decimal": real_str(a),
            "per_level": str(fit.per_level), "per_level_decimal": real_str(b),
            "constant": str(fit.constant), "constant_decimal": real_str(c),
            "minus_log_regularized_det": real_str(-logdet),
            "log_regularized_det": real_str(logdet),
        }
    return _dump(payload)


def cmd_trees(args) -> str:
    spec = _spec(args)
    fr = D.spanning_trees_factored(spec, args.level)
    tau = int(fr.to_fraction())
    return _dump({"model": spec.label(), "level": args.level, "trees": str(tau), "factored": str(fr),
                  "vertices": spec.vertex_count(args.level),
                  "log_trees_per_vertex": real_str(mpmath.log(tau) / spec.vertex_count(args.level))})


def cmd_zeta(args) -> str:
    spec = _spec(args)
    s = parse_complex(args.s)
    res = Z.spectral_zeta_series(spec, s, tolerance=args.tol, depth=args.depth)
    return _dump({"model": spec.label(), "s": {"re": real_str(s.real), "im": real_str(s.imag)},
                  "value": {"re": real_str(res.value.real), "im": real_str(res.value.imag)},
                  "depth": res.depth, "tail_bound": real_str(res.tail_bound) if math.isfinite(res.tail_bound)
                  else "inf", "converged": res.converged})


def cmd_regdet(args) -> str:
    spec = _spec(args)
    rd = Z.regularized_det(spec)
    return _dump({"model": spec.label(), "closed_form": rd.power_string(), "simplified": str(rd.closed_form),
                  "decimal": rd.decimal(30), "zeta_at_0": str(rd.zeta_at_0),
                  "zeta_prime_at_0": str(rd.zeta_prime_at_0), "form": str(rd.form)})


def cmd_poles(args) -> str:
    spec = _spec(args)
    return _dump(Z.complex_dimensions(spec).to_dict(DIGITS))


def cmd_catalog(args) -> str:
    return catalog_json() + "\n"


def cmd_verify(args):
    rep = run_suite(args.suite)
    return _dump({k: v for k, v in rep.to_dict().items() if k != "schema"}), (0 if rep.passed else 1)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fractal-zeta", description="Spectra, determinants and zeta "
                                 "functions of self-similar fractal graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_args(p, level=True):
        p.add_argument("--model", required=True, choices=MODEL_NAMES)
        p.add_argument("--p", default=None, help="pq parameter, e.g. 1/2 or 0.3")
        if level:
            p.add_argument("--level", type=int, required=True)
        p.add_argument("--out", default=None, help="write to FILE instead of stdout")

    g = sub.add_parser("graph", help="level-n graph as edge list, JSON or matrix text")
    model_args(g)
    g.add_argument("--format", choices=("csv", "json", "matrix"), default="json")
    g.add_argument("--kind", default=None, help="Laplacian kind for --format matrix")
    g.set_defaults(func=cmd_graph)

    s = sub.add_parser("spectrum", help="decimation spectrum at level n")
    model_args(s)
    s.add_argument("--kind", default=None)
    s.add_argument("--format", choices=("csv", "json"), default="json")
    s.set_defaults(func=cmd_spectrum)

    d = sub.add_parser("det", help="factored determinant table")
    model_args(d)
    d.add_argument("--kind", default=None)
    d.add_argument("--from", dest="start", type=int, default=None, help="first level of the table")
    d.add_argument("--format", choices=("csv", "json"), default="json")
    d.set_defaults(func=cmd_det)

    t = sub.add_parser("trees", help="spanning tree count")
    model_args(t)
    t.set_defaults(func=cmd_trees)

    z = sub.add_parser("zeta", help="spectral zeta function at s")
    model_args(z, level=False)
    z.add_argument("--s", required=True, help='complex point, e.g. "2+1i"')
    z.add_argument("--depth", type=int, default=40, help="largest preimage depth")
    z.add_argument("--tol", type=float, default=Z.DEFAULT_TOL)
    z.set_defaults(func=cmd_zeta)

    r = sub.add_parser("regdet", help="zeta-regularized determinant in closed form")
    model_args(r, level=False)
    r.set_defaults(func=cmd_regdet)

    pl = sub.add_parser("poles", help="pole lines of the spectral zeta function")
    model_args(pl, level=False)
    pl.set_defaults(func=cmd_poles)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=("all", "oracle", "identities", "corollaries", "mellin"), default="all")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("catalog", help="built-in model catalog as JSON")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    code = 0
    try:
        result = args.func(args)
        if isinstance(result, tuple):
            result, code = result
    except (UsageError, ValueError, IndexError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(result)
    else:
        sys.stdout.write(result)
    return code


if __name__ == "__main__":
    sys.exit(main())
