"""Command-line entry point: neumann-cert <subcommand> [options].

Exit codes: 0 all verdicts pass, 2 a mathematical verdict or tolerance fails, 1 operational error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import certify
from . import closed_form as cf
from . import fem
from .geometry import ConvexPolygon, GeometryError, metrics, read_polygon

log = logging.getLogger("neumann_cert")

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, default=_jsonable)
    if args.out:
        Path(args.out).write_text(text + "\n")
        log.info("wrote %s", args.out)
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _emit_rows(rows: list[dict], args) -> None:
    """CSV for flat tables when --format csv, JSON otherwise."""
    if args.format == "json":
        _emit({"rows": rows}, args)
        return
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()


def _figures():
    # imported lazily so matplotlib is only loaded on the report path
    from . import plotting
    return plotting


# ----------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    zone_names = [args.zone] if args.zone else None
    grid_file = open(args.dump_grid, "w", newline="") if args.dump_grid else None
    writer = None
    if grid_file:
        writer = csv.writer(grid_file)
        writer.writerow(["zone", "a", "c", "F"])

    def on_zone(rep, values):
        a, c, F = values
        if writer is not None:
            for row in zip(a, c, F):
                writer.writerow([rep.zone] + ["%.17g" % v for v in row])
        if args.figures:
            log.info("figure %s", _figures().zone_heatmap(rep, a, c, F, args.figures))

    hook = on_zone if (writer is not None or args.figures) else None
    try:
        report = certify.full_verdict(lip_source=args.lip, workers=args.workers, zone_names=zone_names,
                                      slack=args.slack, on_zone=hook)
    finally:
        if grid_file:
            grid_file.close()
    if args.lip == "computed":
        report["lipschitz"] = {}
        for z in certify.zones():
            if zone_names is None or z.name in zone_names:
                lr = certify.lipschitz_bounds(z)
                report["lipschitz"][z.name] = {"lip_a": lr.lip_a, "lip_c": lr.lip_c,
                                               "reference": certify.REFERENCE_LIPSCHITZ[z.name]}
    _emit(report, args)
    return EXIT_OK if report["overall_verdict"] else EXIT_VERDICT


# ----------------------------------------------------------------- bounds


def _load_polygon(args):
    if args.polygon:
        return read_polygon(args.polygon, convex=True)
    if args.shape:
        return fem.shape_by_name(args.shape)
    raise ValueError("give --polygon FILE or --shape NAME")


def cmd_bounds(args) -> int:
    poly = _load_polygon(args)
    if not isinstance(poly, ConvexPolygon):
        poly = ConvexPolygon(poly.vertices)
    m = metrics(poly)
    mu = None
    fem_report = None
    if args.fem:
        h = args.h if args.h else m.diameter / 40
        r = fem.mu1_fem(poly, h, extrapolate=args.extrapolate)
        mu = r.extrapolated if r.extrapolated is not None else r.mu1
        fem_report = r.as_dict()
    b = bd.bound_set(m, fem_mu1=mu)
    report = {
        "metrics": m.as_dict(),
        "bounds": b.as_dict(),
        "scaled_by_P2": b.scaled(),
        "P2_over_area": m.perimeter**2 / m.area,
        "target": bd.TARGET,
        "fem": fem_report,
    }
    ok = True
    if mu is not None:
        # sandwich with 1% slack for discretization error
        ok = b.pw_lower <= mu * 1.01 and mu <= b.best_upper * 1.01
        report["sandwich_holds"] = bool(ok)
    if args.figures:
        log.info("figure %s", _figures().bounds_plot(b, args.figures))
    _emit(report, args)
    return EXIT_OK if ok else EXIT_VERDICT


# --------------------------------------------------------------- crossval


def cmd_crossval(args) -> int:
    report = cf.crossval(samples=args.samples, seed=args.seed, tol=args.tol)
    _emit(report, args)
    return EXIT_OK if report["verdict"] else EXIT_VERDICT


# -------------------------------------------------------------------- fem


def cmd_fem(args) -> int:
    poly = _load_polygon(args)
    h = args.h if args.h else 0.02 * math.sqrt(poly.area)
    mesh = fem.triangulate(poly, h)
    r = fem.mu1_fem(poly, h, extrapolate=args.extrapolate, mesh=mesh)
    if args.dump_mesh:
        mesh.write(args.dump_mesh)
    mu = r.extrapolated if r.extrapolated is not None else r.mu1
    report = r.as_dict()
    report.update(perimeter=poly.perimeter, area=poly.area, scaled=poly.perimeter**2 * mu, target=fem.TARGET)
    if args.figures:
        log.info("figure %s", _figures().mesh_plot(mesh, args.figures, title=f"h = {mesh.h:.4g}, mu1 = {mu:.6g}"))
    _emit(report, args)
    return EXIT_OK


# ------------------------------------------------------------------ sweep


def cmd_sweep(args) -> int:
    """Finite-element scan of P^2 mu_1 over seeded random convex shapes."""
    rows = fem.conjecture_scan(count=args.samples, seed=args.seed, cells=args.cells, ca_count=args.ca_count)
    limit = fem.TARGET * (1 + args.slack_fem)
    ok = all(r.scaled <= limit for r in rows)
    if args.figures:
        log.info("figure %s", _figures().scan_plot(rows, args.figures))
    if args.format == "csv":
        _emit_rows([r.as_dict() for r in rows], args)
    else:
        _emit({"seed": args.seed, "count": len(rows), "limit": limit, "max_scaled": max(r.scaled for r in rows),
               "verdict": bool(ok), "rows": [r.as_dict() for r in rows]}, args)
    return EXIT_OK if ok else EXIT_VERDICT


# ------------------------------------------------------ demo-nonexistence


def cmd_demo(args) -> int:
    r = fem.zigzag_demo(a=args.a, n=args.n, h=args.h)
    if args.figures:
        from .geometry import zigzag_domain
        mesh = fem.triangulate(zigzag_domain(args.a, args.n), r.h * 1.0000001)
        log.info("figure %s", _figures().mesh_plot(mesh, args.figures, "zigzag.png", f"a = {args.a}, n = {args.n}"))
    _emit(r.as_dict(), args)
    return EXIT_OK if r.exceeds_target else EXIT_VERDICT


# ------------------------------------------------------------------ parser


def _positive_int(s):
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neumann-cert", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json",)):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=fmt, default="json")
        sp.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")

    v = sub.add_parser("verify", help="certified grid sweep plus small-a and midrange certificates")
    common(v)
    v.add_argument("--zone", choices=[z.name for z in certify.zones()])
    v.add_argument("--lip", choices=certify.LIP_SOURCES, default="reference")
    v.add_argument("--workers", type=_positive_int, default=None, help="default: $NEUMANN_CERT_WORKERS or 1")
    v.add_argument("--slack", type=float, default=certify.DEFAULT_SLACK)
    v.add_argument("--dump-grid", metavar="CSV")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="classical eigenvalue bounds for a convex polygon")
    common(b)
    b.add_argument("--polygon", metavar="JSON")
    b.add_argument("--shape", help="square, triangle or ngon<N>")
    b.add_argument("--fem", action="store_true", help="also compute mu_1 by finite elements")
    b.add_argument("--h", type=float)
    b.add_argument("--extrapolate", action="store_true")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("crossval", help="closed forms against adaptive quadrature")
    common(c)
    c.add_argument("--samples", type=_positive_int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-8)
    c.set_defaults(func=cmd_crossval)

    f = sub.add_parser("fem", help="first nonzero Neumann eigenvalue by P1 finite elements")
    common(f)
    f.add_argument("--polygon", metavar="JSON")
    f.add_argument("--shape", help="square, triangle or ngon<N>")
    f.add_argument("--h", type=float)
    f.add_argument("--extrapolate", action="store_true")
    f.add_argument("--dump-mesh", metavar="JSON")
    f.set_defaults(func=cmd_fem)

    s = sub.add_parser("sweep", help="finite-element scan of P^2 mu_1 over random symmetric convex shapes")
    common(s, fmt=("json", "csv"))
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cells", type=_positive_int, default=30, help="mesh size is diameter / cells")
    s.add_argument("--ca-count", type=int, default=10)
    s.add_argument("--slack-fem", type=float, default=0.01)
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("demo-nonexistence", help="zigzag domains with P^2 mu_1 above 16 pi^2")
    common(d)
    d.add_argument("--a", type=float, default=0.2)
    d.add_argument("--n", type=_positive_int, default=40)
    d.add_argument("--h", type=float)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (GeometryError, bd.BoundsError, fem.MeshError, fem.SolverError, certify.NonFiniteError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
