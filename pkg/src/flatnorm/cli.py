"""Command line entry point: ``flatnorm <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import io as fio
from .approx import approximate_curve, load_curve
from .complex import regularity
from .deform import deform_currents
from .flatlp import find_threshold, flat_norm_decompose, sweep
from .geom import GeometryError
from .pipeline import (ExperimentConfig, default_configs, converge_experiment, gen_ngon_disk, gen_strip,
                       save_rows_csv, spanning_experiment, unit_square_boundary)
from .triangulate import localize

log = logging.getLogger("flatnorm")


def _frac(s: str) -> Fraction:
    return Fraction(s)


def _floats(s: str):
    return [float(x) for x in s.split(",") if x.strip()]


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_triangulate(args):
    pslg = fio.load_pslg(args.pslg)
    mesh, comp, report = localize(pslg, args.eps, args.angle, args.size_cap, args.max_edge)
    fio.save_complex(mesh.complex, args.out)
    if args.chain:
        from .complex import Chain
        fio.save_chain(Chain(mesh.complex, 1, mesh.chain_coeffs(0)), args.chain)
    if args.report:
        fio.write_json(report.to_json(), args.report)
    print(json.dumps({"triangles": report.triangles, "min_angle": report.min_angle,
                      "theta_K": report.theta_K, "delta": float(report.delta)}))


def cmd_deform(args):
    K = fio.load_complex(args.mesh, check_embedding=False)
    curves = [fio.load_plc(p) for p in args.curves]
    regions = [fio.load_plr(p) for p in args.regions]
    P, O, cert = deform_currents(curves, regions, K, args.eps, verify_forms=args.forms)
    out = _out(args)
    for i, c in enumerate(P):
        fio.save_chain(c, out / f"curve{i}.csv")
        fio.save_plc(cert.Q[i], out / f"curve{i}_Q.plc")
        if cert.R[i].polygons:
            fio.save_plr(cert.R[i], out / f"curve{i}_R.plr")
    for j, c in enumerate(O):
        fio.save_chain(c, out / f"region{j}.csv")
    if args.cert:
        fio.write_json(cert.to_json(), args.cert)
    print(json.dumps({"ok": cert.ok, "theta_K": cert.theta_K}))
    return 0 if cert.ok else 1


def cmd_flatnorm(args):
    K = fio.load_complex(args.mesh, check_embedding=False)
    t = fio.load_chain(args.chain, K, 1)
    r = flat_norm_decompose(t, K, args.lam)
    d = r.to_json()
    if args.out:
        fio.write_json(d, args.out)
    print(json.dumps({"value": r.value, "integral": r.integral, "residual_ok": r.residual_ok,
                      "mass_x": r.mass_x, "mass_s": r.mass_s}))
    return 0 if r.integral and r.residual_ok else 1


def cmd_approx(args):
    curve = load_curve(args.curve)
    P, cert = approximate_curve(curve, args.rho)
    fio.save_plc(P, args.out)
    if args.cert:
        fio.write_json(cert.to_json(), args.cert)
    print(json.dumps({"chords": cert.chords, "mass_P": cert.mass_P, "ok": cert.ok}))


def cmd_strip(args):
    out = _out(args)
    rows = []
    for n in args.n:
        K, P, T = gen_strip(n, args.side)
        r = flat_norm_decompose(P, K, args.lam)
        rows.append({"n": n, "mass_P": P.mass(), "mass_T": T.mass(), "value": r.value,
                     "ratio": r.value / T.mass(), "x_is_P": r.x == P, "s_zero": r.s.is_zero(),
                     "integral": r.integral})
        fio.save_complex(K, out / f"strip{n}.cx")
        fio.save_chain(P, out / f"strip{n}_P.csv")
    save_rows_csv(rows, out / "strip.csv", list(rows[0]))
    fio.write_json(rows, out / "strip.json")
    for r in rows:
        print(f"n={r['n']} value={r['value']:.12g} ratio={r['ratio']:.12g}")


def cmd_ngon(args):
    out = _out(args)
    K, t = gen_ngon_disk(args.n, args.radius, args.max_edge)
    r = flat_norm_decompose(t, K, args.lam)
    res = {"n": args.n, "mass_t": t.mass(), "value": r.value, "mass_x": r.mass_x, "mass_s": r.mass_s,
           "triangles": K.n_triangles, "integral": r.integral}
    if args.threshold:
        lo, hi = args.threshold
        thr = find_threshold(t, K, lo, hi)
        res["threshold"] = float(thr) if thr is not None else None
    fio.save_complex(K, out / f"ngon{args.n}.cx")
    fio.save_chain(t, out / f"ngon{args.n}.csv")
    fio.write_json(res, out / f"ngon{args.n}.json")
    print(json.dumps(res))


def cmd_converge(args):
    configs = default_configs(args.deltas, args.lam, args.workers, args.out)
    if args.input != "all":
        configs = [c for c in configs if c.name == args.input]
    ok = True
    for cfg in configs:
        res = converge_experiment(cfg)
        print(res.csv(), end="")
        print(json.dumps({"name": cfg.name, **{k: v for k, v in res.verdict.items()}}))
        ok &= res.verdict["ok"]
    return 0 if ok else 1


def cmd_sweep(args):
    K = fio.load_complex(args.mesh, check_embedding=False)
    t = fio.load_chain(args.chain, K, 1)
    rep = sweep(t, K, sorted(args.lambdas))
    rows = [{"lambda": float(l), "value": r.value, "mass_x": r.mass_x, "mass_s": r.mass_s}
            for l, r in zip(rep.lams, rep.results)]
    out = _out(args)
    save_rows_csv(rows, out / "sweep.csv", ["lambda", "value", "mass_x", "mass_s"])
    fio.write_json({"rows": rows, "thresholds": [[float(a), float(b)] for a, b in rep.thresholds],
                    "monotone_value": rep.monotone_value, "concave": rep.concave}, out / "sweep.json")
    for r in rows:
        print(f"{r['lambda']:g},{r['value']:.12g}")


def cmd_spanning(args):
    if args.mesh:
        K = fio.load_complex(args.mesh, check_embedding=False)
        t = fio.load_chain(args.chain, K, 1)
    else:
        K, (t,) = unit_square_boundary()
    res = spanning_experiment(t, K, args.lambdas, (min(args.lambdas), max(args.lambdas)))
    out = _out(args)
    fio.write_json(res, out / "spanning.json")
    print(json.dumps(res["verdict"]))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flatnorm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("triangulate", help="quality mesh of a PSLG")
    p.add_argument("pslg")
    p.add_argument("--eps", type=float, default=None, help="tube area; omit for no grid")
    p.add_argument("--angle", type=float, default=30.0)
    p.add_argument("--max-edge", type=float, default=None)
    p.add_argument("--size-cap", type=int, default=50_000)
    p.add_argument("--out", required=True)
    p.add_argument("--chain", help="write the tagged input as a 1-chain")
    p.add_argument("--report")
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("deform", help="push PL currents onto a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--curves", nargs="*", default=[])
    p.add_argument("--regions", nargs="*", default=[])
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--forms", type=int, default=20, help="random forms for the Stokes check")
    p.add_argument("--out", required=True)
    p.add_argument("--cert")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("flatnorm", help="simplicial flat norm of a 1-chain")
    p.add_argument("--mesh", required=True)
    p.add_argument("--chain", required=True)
    p.add_argument("--lambda", dest="lam", type=_frac, default=Fraction(1))
    p.add_argument("--out")
    p.set_defaults(func=cmd_flatnorm)

    p = sub.add_parser("approx", help="chord approximation of a curve")
    p.add_argument("curve")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cert")
    p.set_defaults(func=cmd_approx)

    for name, fn, helptext in (("strip", cmd_strip, "equilateral strip example"),
                               ("ngon", cmd_ngon, "inscribed n-gon on a disk mesh"),
                               ("converge", cmd_converge, "convergence experiment"),
                               ("sweep", cmd_sweep, "scale sweep of a chain"),
                               ("spanning", cmd_spanning, "spanning versus keeping")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--out", default="out")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--lambda", dest="lam", type=_frac, default=Fraction(1))
        p.add_argument("--deltas", type=_floats, default=[0.1, 0.05, 0.02, 0.01])
        p.set_defaults(func=fn)
        if name == "strip":
            p.add_argument("--n", type=int, nargs="+", default=[2, 4, 8])
            p.add_argument("--side", type=_frac, default=Fraction(2))
        elif name == "ngon":
            p.add_argument("--n", type=int, default=64)
            p.add_argument("--radius", type=float, default=1.0)
            p.add_argument("--max-edge", type=float, default=None)
            p.add_argument("--threshold", type=_frac, nargs=2, metavar=("LO", "HI"))
        elif name == "converge":
            p.add_argument("--input", choices=["all", "segment", "ngon512"], default="all")
            p.add_argument("--workers", type=int, default=1)
        elif name in ("sweep", "spanning"):
            p.add_argument("--mesh", required=(name == "sweep"))
            p.add_argument("--chain", required=(name == "sweep"))
            p.add_argument("--lambdas", type=lambda s: [Fraction(x) for x in s.split(",")],
                           default=[Fraction(1, 10), Fraction(1), Fraction(4), Fraction(100)])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
