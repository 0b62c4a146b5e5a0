"""Command-line front end: JSON in, JSON (and CSV trajectories) out.

Exit status: 0 on success, 1 when a validation verb finds a violation,
2 on usage errors (bad flags, malformed JSON, schema violations).
The only environment variable read is ``NCHODGE_OUTPUT_DIR``, which
prefixes relative output paths.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import os
import re
import sys
import time

import numpy as np

from .algebra_core.serialize import SchemaError, complex_to_json, matrix_to_json, series_to_json, vector_to_json
from .errors import NcHodgeError, UsageError

OUTPUT_DIR_ENV = "NCHODGE_OUTPUT_DIR"


class CliError(Exception):
    """Reported with exit status 2."""


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def _load_json(source: str):
    """Inline JSON (starting with ``{`` or ``[``) or a file path."""
    text = source.strip()
    if text[:1] in "{[":
        where = "inline JSON"
    else:
        where = source
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {source}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{where}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _output_path(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    path = _output_path(path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit(obj, path: str | None) -> None:
    _write_text(json.dumps(obj, indent=2) + "\n", path)


def _write_csv(rows, rank: int, path: str) -> None:
    path = _output_path(path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["t"]
        for k in range(rank):
            header += [f"re_{k}", f"im_{k}"]
        w.writerow(header)
        for s, _z, psi in rows:
            line = [repr(float(s))]
            for v in psi:
                line += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(line)


# ---------------------------------------------------------------- verbs


def cmd_gamma_class(args) -> int:
    from .char_class import gamma_hat_cpn, lattice_map

    series = gamma_hat_cpn(args.n)
    _emit({"n": args.n, "gamma_hat": series_to_json(series), "lattice_map": matrix_to_json(lattice_map(args.n).matrix)}, args.output)
    return 0


def cmd_qconn_build(args) -> int:
    from .quantum_connection import build_cpn_u_connection, connection_to_json, exponent_eigenvalues

    conn = build_cpn_u_connection(args.n, args.q)
    out = connection_to_json(conn)
    out["exponents"] = [complex_to_json(c) for c in exponent_eigenvalues(conn)]
    _emit(out, args.output)
    return 0


def _default_loop(plane: str, base: complex | None, radius: float | None):
    from .flat_transport import PlanePath

    if plane == "u":
        base = -1.0 + 0j if base is None else base
        if base == 0:
            raise UsageError("the base point must differ from 0")
        return PlanePath.circle(0j, abs(base), 1, cmath.phase(base))
    r = 1e-3 if radius is None else radius
    if r <= 0:
        raise UsageError("radius must be positive")
    return PlanePath.circle(0j, r, 1, math.pi)


def cmd_qconn_monodromy(args) -> int:
    from .flat_transport import monodromy, path_from_json, path_to_json, transport_trajectory
    from .quantum_connection import build_cpn_q_connection, build_cpn_u_connection

    if args.plane == "u":
        conn = build_cpn_u_connection(args.n, args.q)
    else:
        conn = build_cpn_q_connection(args.n, args.u)
    if args.loop is not None:
        loop = path_from_json(_load_json(args.loop), "/loop")
    else:
        loop = _default_loop(args.plane, args.base, args.radius)
    m = monodromy(conn, loop, args.tol, args.backend)
    out = {
        "plane": args.plane,
        "n": args.n,
        "loop": path_to_json(loop),
        "tol": args.tol,
        "monodromy": matrix_to_json(m),
        "determinant": complex_to_json(np.linalg.det(m)),
    }
    if args.plane == "u":
        out["q"] = complex_to_json(args.q)
    else:
        out["u"] = complex_to_json(args.u)
    if args.csv:
        v0 = np.zeros(args.n, dtype=complex)
        v0[0] = 1.0
        _write_csv(transport_trajectory(conn, loop, v0, args.tol, args.backend), args.n, args.csv)
        out["trajectory_csv"] = args.csv
    _emit(out, args.output)
    return 0


def cmd_psi_const(args) -> int:
    from .flat_transport import psi_const

    _emit({"n": args.n, "u": complex_to_json(args.u), "psi_const": vector_to_json(psi_const(args.n, args.u))}, args.output)
    return 0


def cmd_stokes_rays(args) -> int:
    from .stokes import all_crossings, circle_composite, exponents_from_json, stokes_directions

    e = exponents_from_json(_load_json(args.exponents))
    dec = stokes_directions(e)
    crossings = all_crossings(e)
    composite = circle_composite(e)
    _emit(
        {
            "exponents": [complex_to_json(c) for c in e.exponents],
            "directions": list(dec.directions),
            "arcs": [list(a) for a in dec.arcs],
            "orders": [list(o) for o in dec.orders],
            "crossings": [
                {
                    "direction": cr.direction,
                    "before": list(cr.before),
                    "after": list(cr.after),
                    "perm": list(cr.perm),
                    "blocks": [list(b) for b in cr.blocks],
                }
                for cr in crossings
            ],
            "circle_identity": list(composite) == list(range(len(e))),
        },
        args.output,
    )
    return 0


def cmd_stokes_validate(args) -> int:
    from .stokes import filtration_from_json, validate_filtration

    f, e = filtration_from_json(_load_json(args.filtration))
    rep = validate_filtration(f, e)
    _emit({"valid": rep.valid, "issues": rep.to_json()}, args.output)
    return 0 if rep.valid else 1


def cmd_betti_check(args) -> int:
    from .betti_gluing import check_acyclicity, descent_from_json

    rep = check_acyclicity(descent_from_json(_load_json(args.descent)))
    _emit(
        {
            "acyclic": rep.acyclic,
            "via_complex": rep.via_complex,
            "via_conditions": rep.via_conditions,
            "injective": rep.injective,
            "quotient_iso": rep.quotient_iso,
        },
        args.output,
    )
    return 0 if rep.acyclic else 1


def cmd_betti_convert(args) -> int:
    from .betti_gluing import biii_from_json, biii_to_descent, biii_to_json, descent_from_json, descent_to_biii, descent_to_json
    from .errors import NotConvertibleError

    data = _load_json(args.input)
    if args.direction == "b3-to-descent":
        _emit(descent_to_json(biii_to_descent(biii_from_json(data))), args.output)
        return 0
    try:
        conv = descent_to_biii(descent_from_json(data))
    except NotConvertibleError as exc:
        _emit({"convertible": False, "reason": str(exc)}, args.output)
        return 1
    out = biii_to_json(conv.biii)
    out["identification"] = matrix_to_json(conv.identification)
    _emit(out, args.output)
    return 0


def _algebra(source: str):
    from .bv_formal import algebra_from_json, builtin_algebras

    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        table = builtin_algebras()
        if name not in table:
            raise CliError(f"unknown built-in algebra {name!r}; choose from {', '.join(sorted(table))}")
        return table[name]
    return algebra_from_json(_load_json(source))


def cmd_bv(args) -> int:
    from .bv_formal import (
        FormalArc,
        check_bv_axioms,
        check_degeneration,
        maurer_cartan_residual,
        minimal_model_products_vanish,
        phi_t,
        random_mc_arc,
    )
    from .algebra_core.serialize import matrix_from_json

    alg = _algebra(args.algebra)
    if args.action == "axioms":
        rep = check_bv_axioms(alg, args.tol)
        _emit({"ok": rep.ok, "failures": rep.failures(), "axioms": rep.to_json()}, args.output)
        return 0 if rep.ok else 1
    if args.action == "degeneration":
        rep = check_degeneration(alg, args.nmax)
        out = rep.to_json()
        out["minimal_model"] = minimal_model_products_vanish(alg).to_json()
        _emit(out, args.output)
        return 0 if rep.degenerate else 1
    if args.arc is not None:
        obj = _load_json(args.arc)
        coeffs = matrix_from_json(obj, "")
        arc = FormalArc(coeffs)
    else:
        arc = random_mc_arc(alg, args.order, args.seed)
    res = phi_t(alg, arc, order=args.order if args.arc is None else None, strict=args.strict)
    _emit(
        {
            "arc": matrix_to_json(arc.coeffs),
            "mc_residual": float(np.max(np.abs(maurer_cartan_residual(alg, arc)), initial=0.0)),
            "classes": matrix_to_json(res.classes),
            "positive_u_residual": res.residual,
        },
        args.output,
    )
    return 0


def selftest_checks() -> list:
    """Fast subset of the acceptance checks: ``(name, ok, detail)`` triples."""
    from .algebra_core.constants import self_check
    from .betti_gluing import biii_to_descent, descent_to_biii
    from .bv_formal import check_degeneration, grassmann_even_laplacian, truncated_polynomial
    from .char_class import gamma_hat_cpn
    from .flat_transport import check_conjugation_identity, psi_const
    from .stokes import circle_composite

    rng = np.random.default_rng(0)
    out = []
    dev = self_check()
    out.append(("constants", True, f"max deviation {max(dev.values()):.2e}"))
    err = max(np.max(np.abs(psi_const(n, -1.0) - gamma_hat_cpn(n).coeffs)) for n in range(2, 7))
    out.append(("gamma_class", err <= 1e-10, f"max error {err:.2e}"))
    spread = 0.0
    for n in (2, 3, 4):
        vals = [psi_const(n, u) for u in (-0.5, -1.0, -2.0, -4.0)]
        spread = max(spread, max(float(np.max(np.abs(v - vals[0]))) for v in vals))
    out.append(("u_independence", spread <= 1e-8, f"spread {spread:.2e}"))
    res = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        u = complex(-rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        res = max(res, check_conjugation_identity(n, u, v))
    out.append(("conjugation", res <= 1e-8, f"max residual {res:.2e}"))
    ok = True
    for _ in range(10):
        m = int(rng.integers(2, 6))
        e = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        ok &= list(circle_composite(tuple(e))) == list(range(m))
    out.append(("stokes_circle", ok, "composite is the identity on 10 random sets"))
    from .betti_gluing import BiiiData

    dev = 0.0
    for _ in range(10):
        dims = [int(x) for x in rng.integers(1, 3, size=3)]
        grid = [[rng.standard_normal((dims[i], dims[j])) for j in range(3)] for i in range(3)]
        b = BiiiData((0j, 1 + 0j, 2 + 0j), tuple(dims), tuple(tuple(r) for r in grid))
        conv = descent_to_biii(biii_to_descent(b))
        phi = conv.identification
        expect = phi @ b.total_matrix() @ np.linalg.inv(phi)
        dev = max(dev, float(np.max(np.abs(conv.biii.total_matrix() - expect))))
    out.append(("betti_round_trip", dev <= 1e-10, f"max deviation {dev:.2e}"))
    rep = check_degeneration(grassmann_even_laplacian(), 2)
    row = rep.rows[1]
    out.append(("bv_degeneration", (row.dim, row.expected) == (6, 8), f"N=2: {row.dim} vs {row.expected}"))
    free = check_degeneration(truncated_polynomial(3), 4).degenerate
    out.append(("bv_delta_zero", free, "Delta = 0 free for N <= 4"))
    return out


def cmd_selftest(args) -> int:
    start = time.perf_counter()
    checks = selftest_checks()
    ok = all(c[1] for c in checks)
    _emit(
        {
            "ok": ok,
            "seconds": round(time.perf_counter() - start, 3),
            "checks": [{"name": n, "ok": bool(p), "detail": d} for n, p, d in checks],
        },
        args.output,
    )
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nchodge", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gamma-class", parents=[common], help="Gamma-hat class of CP^{n-1}")
    g.add_argument("--n", type=_positive_int, required=True)
    g.set_defaults(func=cmd_gamma_class)

    q = sub.add_parser("qconn", help="quantum connection of CP^{n-1}")
    qs = q.add_subparsers(dest="action", required=True)
    qb = qs.add_parser("build", parents=[common])
    qb.add_argument("--n", type=_positive_int, required=True)
    qb.add_argument("--q", type=_complex_arg, default=1 + 0j)
    qb.set_defaults(func=cmd_qconn_build)
    qm = qs.add_parser("monodromy", parents=[common])
    qm.add_argument("--plane", choices=("u", "q"), required=True)
    qm.add_argument("--n", type=_positive_int, required=True)
    qm.add_argument("--q", type=_complex_arg, default=0j, help="fixed q for the u-plane (default 0)")
    qm.add_argument("--u", type=_complex_arg, default=-1 + 0j, help="fixed u for the q-plane (default -1)")
    qm.add_argument("--base", type=_complex_arg, help="u-plane base point; loop is the circle through it (default -1)")
    qm.add_argument("--radius", type=float, help="q-plane loop radius (default 1e-3)")
    qm.add_argument("--loop", help="loop as JSON (file or inline); overrides --base/--radius")
    qm.add_argument("--tol", type=float, default=1e-10)
    qm.add_argument("--backend", choices=("compiled", "python"))
    qm.add_argument("--csv", help="write the trajectory of the first basis vector as CSV")
    qm.set_defaults(func=cmd_qconn_monodromy)

    ps = sub.add_parser("psi-const", parents=[common], help="normalized flat section P(u) psi_cl(u)")
    ps.add_argument("--n", type=_positive_int, required=True)
    ps.add_argument("--u", type=_complex_arg, default=-1 + 0j)
    ps.set_defaults(func=cmd_psi_const)

    s = sub.add_parser("stokes", help="Stokes directions and filtrations")
    ss = s.add_subparsers(dest="action", required=True)
    sr = ss.add_parser("rays", parents=[common])
    sr.add_argument("--exponents", required=True)
    sr.set_defaults(func=cmd_stokes_rays)
    sv = ss.add_parser("validate", parents=[common])
    sv.add_argument("--filtration", required=True)
    sv.set_defaults(func=cmd_stokes_validate)

    b = sub.add_parser("betti", help="gluing and descent data")
    bs = b.add_subparsers(dest="action", required=True)
    bc = bs.add_parser("check", parents=[common])
    bc.add_argument("--descent", required=True)
    bc.set_defaults(func=cmd_betti_check)
    bv = bs.add_parser("convert", parents=[common])
    bv.add_argument("--direction", choices=("b3-to-descent", "descent-to-b3"), required=True)
    bv.add_argument("--input", required=True)
    bv.set_defaults(func=cmd_betti_convert)

    v = sub.add_parser("bv", help="BV algebras")
    v.add_argument("action", choices=("axioms", "degeneration", "phi-t"))
    v.add_argument("--algebra", required=True, help="JSON file, inline JSON or builtin:NAME")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--nmax", type=_positive_int, default=4)
    v.add_argument("--arc", help="phi-t: arc coefficients as a K x D matrix JSON")
    v.add_argument("--order", type=_positive_int, default=3, help="phi-t: order of the random arc")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--strict", action="store_true")
    v.add_argument("--output", "-o")
    v.set_defaults(func=cmd_bv)

    t = sub.add_parser("selftest", parents=[common], help="constants oracles and fast acceptance checks")
    t.set_defaults(func=cmd_selftest)
    return p


COMPLEX_OPTIONS = ("--q", "--u", "--base")
_NUMBER_START = re.compile(r"-\.?\d")


def _attach_complex_values(argv: list) -> list:
    """Rewrite ``--u -2,0`` as ``--u=-2,0`` so argparse does not read the value as an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in COMPLEX_OPTIONS and i + 1 < len(argv) and _NUMBER_START.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_complex_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"nchodge: invalid input at {exc}", file=sys.stderr)
        return 2
    except (CliError, UsageError) as exc:
        print(f"nchodge: {exc}", file=sys.stderr)
        return 2
    except NcHodgeError as exc:
        print(f"nchodge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
