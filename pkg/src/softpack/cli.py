"""Command-line front ends ``soft2d`` and ``soft3d``.

Tables go out as CSV with 12 significant digits, reports as JSON with
sorted keys, so a fixed ``--seed`` reproduces the output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import config
from .errors import SoftPackError

FLOAT = "%.12g"


def parse_values(text):
    """``a:b:n`` (n points, inclusive), a comma list, or a single number."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(a, b, n)]
    return [float(v) for v in text.split(",") if v.strip()]


def _cell(v):
    if v is None or v == "":
        return ""
    if isinstance(v, (float, np.floating)):
        return FLOAT % float(v)
    return str(v)


def write_csv(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(h)) for h in header])
    _emit(buf.getvalue(), out)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(obj, out):
    _emit(json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n", out)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        p = Path(out)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True)
        p.write_text(text)


def _common(p):
    p.add_argument("--seed", type=int, default=42, help="root random seed")
    p.add_argument("--tol", type=float, default=config.TOL, help="geometric tolerance")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--samples", type=int, default=None, help="sample count (meaning depends on command)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")


# ---------------------------------------------------------------- soft2d


def _lattice2d(body, source, theta):
    from .soft2d import Lattice2D, triangle_lattice

    if source in (None, "tri", "triangle"):
        if body.threefold:
            return triangle_lattice(body, theta)
        u = np.array([np.cos(theta), np.sin(theta)])
        v = np.array([np.cos(theta + np.pi / 3), np.sin(theta + np.pi / 3)])
        lat = Lattice2D([u, v])
        return Lattice2D(lat.basis * 2.0 / lat.min_gauge(body))
    p = Path(source)
    data = json.loads(p.read_text() if p.exists() else source)
    basis = data["basis"] if isinstance(data, dict) else data
    return Lattice2D(basis)


def _soft2d_density(args):
    from .gauge2d import load_body
    from .soft2d import lattice_soft_density

    body = load_body(args.body)
    lat = _lattice2d(body, args.lattice, args.theta)
    rows = []
    for lam in parse_values(args.lam):
        rows.append({"lambda": lam, "density": lattice_soft_density(lat, body, lam, args.tol),
                     "direction_theta": args.theta, "cells_counted": 1})
    if args.cmd == "sweep":
        d = [r["density"] for r in rows]
        if any(b < a - 1e-12 for a, b in zip(d[:-1], d[1:])):
            print("warning [monotonicity]: density decreased along the sweep", file=sys.stderr)
    write_csv(rows, ["lambda", "density", "direction_theta", "cells_counted"], args.out)
    return 0


def _soft2d_optimize(args):
    from .gauge2d import load_body
    from .soft2d import optimal_lattice_search

    body = load_body(args.body)
    rows = []
    for lam in parse_values(args.lam):
        res = optimal_lattice_search(body, lam, args.samples or 720, threads=args.threads)
        rows.append({"lambda": lam, "density": res.density, "direction_theta": res.theta, "cells_counted": 1})
    write_csv(rows, ["lambda", "density", "direction_theta", "cells_counted"], args.out)
    return 0


def _soft2d_window(args):
    from .gauge2d import load_body
    from .soft2d import window_soft_density
    from .tess2d import random_saturated_config, tessellate

    body = load_body(args.body)
    lams = parse_values(args.lam)
    rows = []
    n = args.samples or 5
    for k, ss in enumerate(np.random.SeedSequence(args.seed).spawn(n)):
        cfg = random_saturated_config(body, (0.0, 0.0, args.size, args.size), np.random.default_rng(ss))
        tess = tessellate(cfg, max_circumradius=2.0, tol=args.tol)
        for lam in lams:
            dens, count = window_soft_density(cfg, lam, tess)
            rows.append({"lambda": lam, "density": dens, "direction_theta": "", "cells_counted": count})
    write_csv(rows, ["lambda", "density", "direction_theta", "cells_counted"], args.out)
    return 0


def _soft2d_decompose(args):
    from .tess2d import bridge_contacts, load_config, tessellate, tessellation_json, tessellation_svg, tiling_areas

    cfg = load_config(args.config)
    tess = tessellate(cfg, tol=args.tol, max_circumradius=args.max_circumradius)
    rep = tessellation_json(tess)
    rep["areas"] = {k: round(v, 9) for k, v in tiling_areas(tess).items()}
    rep["bridge_contacts"] = len(bridge_contacts(tess))
    if args.svg:
        Path(args.svg).write_text(tessellation_svg(tess))
    write_json(rep, args.out)
    return 0 if rep["bridge_contacts"] == 0 else 1


def _soft2d_lemmas(args):
    from .gauge2d import load_body
    from .soft2d import apex_monotonicity_check, base_monotonicity_check, linear_map_arc_check

    body = load_body(args.body)
    trials = args.samples or 1000
    out = {"apex": {}, "base": {}}
    bad = 0
    for lam in parse_values(args.lam):
        a = apex_monotonicity_check(body, lam, trials, seed=args.seed)
        b = base_monotonicity_check(body, lam, trials, seed=args.seed)
        out["apex"][FLOAT % lam] = a.as_dict()
        out["base"][FLOAT % lam] = b.as_dict()
        bad += len(a.violations) + len(b.violations)
    arc = linear_map_arc_check(body, max(trials // 2, 1), seed=args.seed)
    out["arc"] = arc.as_dict()
    bad += len(arc.violations)
    out["violations"] = bad
    write_json(out, args.out)
    return 0 if bad == 0 else 1


def soft2d_parser():
    p = argparse.ArgumentParser(prog="soft2d", description="Soft densities of packings in a normed plane")
    sub = p.add_subparsers(dest="cmd", required=True)

    for name in ("density", "sweep"):
        s = sub.add_parser(name, help="soft density of a lattice packing")
        _common(s)
        s.add_argument("--body", default="euclid96")
        s.add_argument("--lattice", default="tri", help="'tri' or a JSON basis (rows)")
        s.add_argument("--lambda", dest="lam", default="0:0.16:33" if name == "sweep" else "0.1")
        s.add_argument("--theta", type=float, default=0.0, help="edge direction of 'tri' (radians)")
        s.set_defaults(func=_soft2d_density)

    s = sub.add_parser("optimize", help="best regular-triangle lattice over edge directions")
    _common(s)
    s.add_argument("--body", default="euclid96")
    s.add_argument("--lambda", dest="lam", default="0.1")
    s.set_defaults(func=_soft2d_optimize)

    s = sub.add_parser("window", help="area-weighted density of random saturated packings")
    _common(s)
    s.add_argument("--body", default="dodecagon")
    s.add_argument("--lambda", dest="lam", default="0.05")
    s.add_argument("--size", type=float, default=20.0, help="side of the square window")
    s.set_defaults(func=_soft2d_window)

    s = sub.add_parser("decompose", help="Delaunay, Molnár and refined decompositions of a configuration")
    _common(s)
    s.add_argument("--config", required=True)
    s.add_argument("--svg", default=None)
    s.add_argument("--max-circumradius", type=float, default=None)
    s.set_defaults(func=_soft2d_decompose)

    s = sub.add_parser("check-lemmas", help="random sweeps of the triangle monotonicity checks")
    _common(s)
    s.add_argument("--body", default="euclid96")
    s.add_argument("--lambda", dest="lam", default="0.05,0.1,0.15")
    s.set_defaults(func=_soft2d_lemmas)
    return p


# ---------------------------------------------------------------- soft3d


def _soft3d_curve(args):
    from .lat3d import LAMBDA_MAX, load_lattice, soft_density_upper_bound
    from .softvol3d import soft_density_3d

    names = [n.strip() for n in args.lattice.split(",") if n.strip()]
    lats = [load_lattice(n) for n in names]
    cols = ["rho_" + (n if n.isidentifier() else f"l{k}") for k, n in enumerate(names)]
    rows = []
    for lam in parse_values(args.lam):
        row = {"lambda": lam}
        for c, lat in zip(cols, lats):
            row[c] = soft_density_3d(lat, lam, tol=args.tol)
        row["upper_bound"] = soft_density_upper_bound(lam) if 0 <= lam < LAMBDA_MAX else None
        rows.append(row)
    for c in cols:
        full = [r["lambda"] for r in rows if r[c] >= 1.0]
        if full:
            print(f"note: {c} reaches 1 at lambda = {FLOAT % min(full)} (covering radius - 1)", file=sys.stderr)
    write_csv(rows, ["lambda", *cols, "upper_bound"], args.out)
    return 0


def _soft3d_bound(args):
    from .lat3d import soft_density_upper_bound

    rows = [{"lambda": lam, "upper_bound": soft_density_upper_bound(lam)} for lam in parse_values(args.lam)]
    write_csv(rows, ["lambda", "upper_bound"], args.out)
    return 0


def _soft3d_localmax(args):
    from .softvol3d import local_max_experiment

    lam = parse_values(args.lam)[0]
    rep = local_max_experiment(lam, args.trials, tuple(parse_values(args.t)), seed=args.seed, mode=args.mode)
    write_json(rep, args.out)
    return 0 if rep["violations"] == 0 else 1


def _soft3d_csikos(args):
    from .softvol3d import BallCluster, csikos_derivative, pair_speeds, union_volume

    rows = []
    worst = 0.0
    h = 1e-5
    for k, ss in enumerate(np.random.SeedSequence(args.seed).spawn(args.samples or 100)):
        rng = np.random.default_rng(ss)
        n = int(rng.integers(2, 6))
        x = rng.uniform(-1.2, 1.2, (n, 3))
        r = rng.uniform(0.7, 1.3, n)
        v = rng.standard_normal((n, 3))
        cl = BallCluster(x, r)
        an = csikos_derivative(cl, pair_speeds(x, v))
        fd = (union_volume(cl.moved(x + h * v)) - union_volume(cl.moved(x - h * v))) / (2 * h)
        err = abs(an - fd) - 1e-4 * abs(fd)
        worst = max(worst, abs(an - fd) / max(abs(fd), 1e-300) if abs(an - fd) > 1e-8 else 0.0)
        rows.append({"trial": k, "balls": n, "analytic": an, "fd": fd, "pass": bool(err <= 1e-8)})
    rep = {"trials": len(rows), "failures": sum(not r["pass"] for r in rows), "max_rel_err": worst, "rows": rows}
    write_json(rep, args.out)
    return 0 if rep["failures"] == 0 else 1


def _soft3d_cell(args):
    from .lat3d import covering_radius, dv_cell, load_lattice, minimal_vectors

    lat = load_lattice(args.lattice)
    cell = dv_cell(lat)
    if args.off:
        Path(args.off).write_text(cell.to_off())
    rep = {
        "det": lat.det,
        "volume": cell.volume,
        "faces": len(cell.faces),
        "vertices": len(cell.vertices),
        "edges": cell.n_edges,
        "face_areas": sorted(round(a, 12) for a in cell.face_areas()),
        "inradius": cell.inradius,
        "covering_radius": covering_radius(lat),
        "minimal_vectors": len(minimal_vectors(lat)),
    }
    write_json(rep, args.out)
    return 0


def soft3d_parser():
    p = argparse.ArgumentParser(prog="soft3d", description="Soft densities of lattice ball packings in space")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("curve", help="soft density against lambda")
    _common(s)
    s.add_argument("--lattice", default="fcc,bcc", help="comma list of presets or lattice files")
    s.add_argument("--lambda", dest="lam", default="0:0.29:30")
    s.set_defaults(func=_soft3d_curve)

    s = sub.add_parser("bound", help="upper bound on the soft density of any packing")
    _common(s)
    s.add_argument("--lambda", dest="lam", default="0.25")
    s.set_defaults(func=_soft3d_bound)

    s = sub.add_parser("localmax", help="random deformations of the FCC lattice")
    _common(s)
    s.add_argument("--lambda", dest="lam", default="0.1")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--t", default="0.001,0.01", help="deformation parameters to evaluate")
    s.add_argument("--mode", choices=("constrained", "free"), default="constrained")
    s.set_defaults(func=_soft3d_localmax)

    s = sub.add_parser("csikos-check", help="wall formula against finite differences of the union volume")
    _common(s)
    s.set_defaults(func=_soft3d_csikos)

    s = sub.add_parser("cell", help="Dirichlet-Voronoi cell summary")
    _common(s)
    s.add_argument("--lattice", default="fcc")
    s.add_argument("--off", default=None, help="write the cell as OFF")
    s.set_defaults(func=_soft3d_cell)
    return p


def _run(parser, argv):
    args = parser.parse_args(argv)
    config.TOL = args.tol
    try:
        return args.func(args)
    except SoftPackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        config.TOL = 1e-9


def soft2d_main(argv=None):
    return _run(soft2d_parser(), argv)


def soft3d_main(argv=None):
    return _run(soft3d_parser(), argv)


if __name__ == "__main__":
    sys.exit(soft2d_main())
