"""Command-line entry point ``laplace-toda``.

Exit codes: 0 ok, 1 a check failed, 2 usage or parse error, 3 degenerate
input (with the module error named in the message).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import disc, disc_spectral, floquet, io, semidisc, toda, verify
from .config import DEFAULT, RunConfig
from .errors import DegenerateW, LaplaceTodaError, ParseError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3
VARIANTS = [f"{s}x{o}" for s in ("pp", "pm", "mp", "mm") for o in ("12", "21")]


class Degenerate(Exception):
    """Wraps a module error raised part-way through a command."""

    def __init__(self, exc: LaplaceTodaError, step: Optional[int] = None):
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"{type(exc).__name__}{where}: {exc}")


def _out(args, name: str) -> str:
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


def _config(args) -> RunConfig:
    tol = DEFAULT if args.tol is None else DEFAULT.with_(tol=args.tol)
    return RunConfig(tolerances=tol, seed=args.seed)


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _cplx(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


# spectral -------------------------------------------------------------

def _floquet_system(L: semidisc.SemiDiscreteOperator, cfg: RunConfig) -> floquet.FloquetSystem:
    try:
        return floquet.FloquetSystem.from_operator(L)
    except ValueError:
        pass
    I = semidisc.product_ratio(L, cfg.tolerances)
    target = (-1.0) ** L.N
    if not I.is_constant(1e-12) or abs(I.coeff(0) - target) > 1e-12:
        raise ValueError("spectral data needs b = -1, d = 1 or a constant "
                         "product ratio I = (-1)^N")
    minus = floquet.PeriodicFunction.constant(-1.0, L.period)
    Ln, _ = semidisc.periodic_canonical_form(L, cfg.tolerances, Z=minus)
    return floquet.FloquetSystem(Ln.a, Ln.c, L.period)


def cmd_spectral(args) -> int:
    doc = io.load(args.input)
    cfg = _config(args)
    L = doc.obj
    if doc.kind == io.DISC:
        curve = disc_spectral.spectral_poly(L)
        p, q, s = disc_spectral.consistency_R_Rhat(L, curve.R, curve.Rhat)
        pts = disc_spectral.spectral_points(L)
        data = {
            "terms": [[i, j, str(c)] for (i, j), c in sorted(curve.R.terms.items())],
            "genus": curve.genus,
            "newton_ok": curve.newton_ok,
            "corners": curve.corners,
            "R_vs_Rhat": {"exponents": [p, q], "scalar": str(s)},
            "points": {k: [str(v) for v in getattr(pts, k)]
                       for k in ("Pplus", "Pminus", "Qplus", "Qminus")},
        }
        _write_json(_out(args, "spectral.json"), data)
        print(f"genus {curve.genus}, {len(curve.R.terms)} terms")
        return EXIT_OK
    if doc.kind != io.SEMI:
        raise ParseError(f"spectral expects an operator file, got {doc.kind}")
    try:
        sysf = _floquet_system(L, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    grid = args.rho_grid if args.rho_grid else cfg.rho_grid
    samples = floquet.spectral_sample(sysf, [complex(r) for r in grid], tolerances=cfg.tolerances)
    N = sysf.N
    failures = 0
    with open(_out(args, "curve.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho_re", "rho_im"] + [f"mu{i}_{p}" for i in range(1, N + 1) for p in ("re", "im")]
                   + ["status"])
        for s in samples:
            if isinstance(s, floquet.SampleFailure):
                failures += 1
                w.writerow(_cplx(s.rho) + [""] * (2 * N) + [s.error])
                continue
            mus = sorted(s.eigenvalues, key=lambda z: (round(abs(z), 12), np.angle(z)))
            w.writerow([repr(v) for v in _cplx(s.rho)]
                       + [repr(v) for z in mus for v in _cplx(z)] + ["ok"])
    fz = floquet.fiber_routes(sysf, "zero", tolerances=cfg.tolerances)
    fi = floquet.fiber_routes(sysf, "infinity", tolerances=cfg.tolerances)
    _write_json(_out(args, "fibers.json"), {
        "zero": {"closed_form": [_cplx(z) for z in fz.closed_form],
                 "integrated": [_cplx(z) for z in fz.integrated], "mismatch": fz.mismatch},
        "infinity": {"closed_form": [_cplx(z) for z in fi.closed_form],
                     "integrated": [_cplx(z) for z in fi.integrated], "mismatch": fi.mismatch},
    })
    print(f"{len(samples) - failures} of {len(samples)} rho points sampled")
    return EXIT_OK


# laplace --------------------------------------------------------------

def _semi_trace_rows(step, inv: semidisc.GaugeInvariants, points=64):
    y = np.arange(points) * (inv.period / points)
    rows = []
    for n in range(inv.N):
        wv, Av = inv.w[n](y), inv.A[n](y)
        rows.append([step, n, float(np.min(np.abs(wv))), *map(float, _cplx(np.mean(wv))),
                     *map(float, _cplx(np.mean(Av)))])
    return rows


def _disc_trace_rows(step, inv: disc.DiscreteGaugeInvariants):
    return [[step, i, j, str(inv.w[i][j]), str(inv.H[i][j])]
            for i in range(len(inv.w)) for j in range(len(inv.w[0]))]


def cmd_laplace(args) -> int:
    doc = io.load(args.input)
    cfg = _config(args)
    tol = cfg.tolerances
    L = doc.obj
    meta = dict(doc.metadata)
    if args.count < 0:
        raise ParseError("--count must be nonnegative")
    if doc.kind == io.SEMI:
        fwd = semidisc.laplace_first if args.type == "first" else semidisc.laplace_second
        back = semidisc.laplace_second if args.type == "first" else semidisc.laplace_first
        step_op = lambda x: fwd(x, tol)  # noqa: E731
        inv_op = lambda x: back(x, tol)  # noqa: E731
        invariants = lambda x: semidisc.canonical_invariants(x, tol)  # noqa: E731
        header = ["step", "n", "w_min_abs", "w_mean_re", "w_mean_im", "A_mean_re", "A_mean_im"]
        rows_of = _semi_trace_rows
    elif doc.kind == io.DISC:
        signs, order = (args.variant or "ppx12").split("x")
        other = "21" if order == "12" else "12"
        step_op = lambda x: disc.laplace_variant(x, signs, order)  # noqa: E731
        inv_op = lambda x: disc.laplace_variant(x, signs, other)  # noqa: E731
        invariants = disc.invariants
        header = ["step", "i", "j", "w", "H"]
        rows_of = _disc_trace_rows
    else:
        raise ParseError(f"laplace expects an operator file, got {doc.kind}")

    ops = [L]
    rows = []
    try:
        rows += rows_of(0, invariants(L))
    except LaplaceTodaError as exc:
        raise Degenerate(exc, 0) from exc
    for k in range(1, args.count + 1):
        try:
            ops.append(step_op(ops[-1]))
            rows += rows_of(k, invariants(ops[-1]))
        except LaplaceTodaError as exc:
            raise Degenerate(exc, k) from exc
    for k, op in enumerate(ops):
        io.dump(op, _out(args, f"op_{k:03d}.json"), meta)
    with open(_out(args, "trace.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    status = EXIT_OK
    report = {"count": args.count}
    if doc.kind == io.DISC:
        try:
            rep = disc_spectral.laplace_spectral_invariance(L, strict=False)
            report["spectral_invariance"] = rep.rows
        except LaplaceTodaError as exc:
            report["spectral_invariance"] = f"{type(exc).__name__}: {exc}"
    if args.then_inverse:
        cur = ops[-1]
        for k in range(args.count):
            try:
                cur = inv_op(cur)
            except LaplaceTodaError as exc:
                raise Degenerate(exc, args.count + k + 1) from exc
        if doc.kind == io.SEMI:
            dist = semidisc.invariants_distance(invariants(cur), invariants(L))
            same = dist < 1e-8
            report["invariants_distance"] = dist
        else:
            same = disc.same_class(cur, L)
        report["gauge_equivalent"] = bool(same)
        print(f"gauge-equivalent: {'true' if same else 'false'}")
        status = EXIT_OK if same else EXIT_CHECK
    _write_json(_out(args, "report.json"), report)
    return status


# toda -----------------------------------------------------------------

def _semi_field_report(field: toda.SemiDiscreteField, args, cfg) -> int:
    K = len(field.layers) - 1
    rows, compat, todamax = [], 0.0, 0.0
    for k in range(field.k0 + 1, field.k0 + K):
        for n in range(field.N):
            r = toda.eqw_residual(field, k, n, cfg.tolerances).sup_norm()
            compat = max(compat, r)
            rows.append(["compatibility", k, n, repr(r)])
    if K >= 2:
        zero = floquet.PeriodicFunction.constant(0.0, field.period)
        gf = toda.reconstruct_g(field, zero, None, cfg.tolerances)
        for k in range(1, K):
            for n in range(0, K - k):
                r = toda.toda_residual_2D1(gf, k, n, cfg.tolerances).sup_norm()
                todamax = max(todamax, r)
                rows.append(["toda", k, n, repr(r)])
    with open(_out(args, "residuals.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["equation", "k", "n", "sup_residual"])
        w.writerows(rows)
    print(f"max compatibility residual {compat:.3e}, max Toda residual {todamax:.3e}")
    return EXIT_OK if compat < 1e-7 and todamax < 1e-6 else EXIT_CHECK


def _disc_field_report(field: toda.DiscreteField, args) -> int:
    ks = sorted(field.layers)
    k0 = ks[0]
    if k0 + 1 not in field.layers:
        raise ParseError("discrete field needs two consecutive layers")
    layers = {k0: field.layers[k0], k0 + 1: field.layers[k0 + 1]}
    for k in ks[2:]:
        layers[k] = field.layers[k]
    work = toda.DiscreteField(field.periods, layers)
    top = max(ks)
    for s in range(args.steps):
        k = k0 + s
        if k + 2 in work.layers:
            continue
        try:
            work.layers[k + 2] = toda.discrete_toda_step(work, k)
        except LaplaceTodaError as exc:
            raise Degenerate(exc, s + 1) from exc
        top = max(top, k + 2)
    rows, worst = [], Fraction(0)
    for k in range(k0, top - 1):
        try:
            res = toda.discrete_toda_residual(work, k)
        except ZeroDivisionError:
            raise Degenerate(DegenerateW(f"w = -1 or 0 in layer {k + 1}"), k)
        for (n, m), v in sorted(res.items()):
            worst = max(worst, abs(v))
            rows.append([k, n, m, str(v)])
    io.dump(work, _out(args, "field.json"))
    with open(_out(args, "residuals.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "n", "m", "residual"])
        w.writerows(rows)
    print(f"{len(work.layers)} layers, max residual {worst}")
    return EXIT_OK if worst == 0 else EXIT_CHECK


def cmd_toda(args) -> int:
    doc = io.load(args.input)
    cfg = _config(args)
    obj = doc.obj
    if doc.kind == io.DISC_FIELD:
        for k in obj.layers:
            try:
                obj.check_layer(k)
            except LaplaceTodaError as exc:
                raise Degenerate(exc) from exc
        return _disc_field_report(obj, args)
    if doc.kind == io.DISC:
        ops = [obj]
        try:
            for s in range(args.steps + 1):
                ops.append(disc.laplace12_pp(ops[-1]))
        except LaplaceTodaError as exc:
            raise Degenerate(exc, len(ops)) from exc
        field = toda.DiscreteField(obj.periods, {k: disc.invariants(op).w for k, op in enumerate(ops)})
        for k in field.layers:
            try:
                field.check_layer(k)
            except LaplaceTodaError as exc:
                raise Degenerate(exc, k) from exc
        return _disc_field_report(field, argparse.Namespace(**{**vars(args), "steps": 0}))
    if doc.kind == io.SEMI_FIELD:
        return _semi_field_report(obj, args, cfg)
    if doc.kind == io.SEMI:
        try:
            _, inv = semidisc.periodic_canonical_form(obj, cfg.tolerances)
            chain = semidisc.build_chain(inv, max(args.steps, 2), cfg.tolerances)
        except LaplaceTodaError as exc:
            raise Degenerate(exc) from exc
        field = toda.field_from_chain(chain)
        io.dump(field, _out(args, "field.json"), doc.metadata)
        return _semi_field_report(field, args, cfg)
    raise ParseError(f"unsupported input kind {doc.kind}")


# verify ---------------------------------------------------------------

def cmd_verify(args) -> int:
    name = args.suite or "all"
    if name != "all" and name not in verify.SUITES:
        print(f"error: unknown suite {name!r}; choose from all, {', '.join(verify.SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    checks = verify.run_suite(name, args.seed)
    for c in checks:
        print(c.line())
    if args.output_dir:
        _write_json(_out(args, "verify.json"),
                    {"suite": name, "seed": args.seed,
                     "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]})
    return EXIT_OK if all(c.ok for c in checks) else EXIT_CHECK


# argument parsing -------------------------------------------------------

def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laplace-toda", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        sp.add_argument("--input", required=needs_input, help="operator or field file (JSON)")
        sp.add_argument("--output-dir", default=".", help="directory for output files")
        sp.add_argument("--tol", type=float, default=None, help="integrator tolerance")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("spectral", help="spectral curve data of an operator")
    common(sp)
    sp.add_argument("--rho-grid", type=_parse_complex, nargs="+", default=None,
                    help="rho values for semi-discrete sampling")
    sp.set_defaults(func=cmd_spectral)

    sp = sub.add_parser("laplace", help="apply Laplace transformations")
    common(sp)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--type", choices=("first", "second"), default="first")
    sp.add_argument("--variant", choices=VARIANTS, default=None)
    sp.add_argument("--then-inverse", action="store_true",
                    help="undo the chain and report gauge equivalence")
    sp.set_defaults(func=cmd_laplace)

    sp = sub.add_parser("toda", help="evolve or check the Toda lattices")
    common(sp)
    sp.add_argument("--steps", type=int, default=4)
    sp.set_defaults(func=cmd_toda)

    sp = sub.add_parser("verify", help="run a seeded self-check suite")
    common(sp, needs_input=False)
    sp.set_defaults(output_dir=None)
    sp.add_argument("--suite", default="all")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: ParseError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Degenerate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except LaplaceTodaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
