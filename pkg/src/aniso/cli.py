"""Command-line interface.

Every subcommand reads patterns as CSV, writes numeric grids as CSV and
parameters or reports as JSON, and records a manifest next to its
outputs. Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .fry import NumericalError, average_rotation, fit_ellipsoid, pseudo_fry
from .geometry import CylinderSpec, Direction, SectorSpec
from .io import (config_hash, file_digest, parse_window, read_pattern, write_csv, write_json,
                 write_pattern)
from .isotests import (ellipse_axis_test, guan_test, replicate_test, wavelet_direction_test,
                       wong_test)
from .nn import directional_distribution, g_global, g_local, nn_records, orientation_density
from .second_order import (fry, k_measure, orientation_density_2nd, pcf_aniso, pcf_conical,
                           pcf_cylindrical, pcf_guan, pcf_isotropic)
from .simulate import (GeometricTransform, clustered_archetype, model_from_dict,
                       regular_archetype, simulate, simulate_transformed)
from .spectral import chi2_envelope, periodogram, r_spectrum, smooth, theta_spectrum
from .wavelet import cwt, energy, rosenberg_variance

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def thread_count(value=None):
    """Worker count from ``--threads``, then ``ANISO_THREADS``, then the
    number of logical cores."""
    if value is None:
        env = os.environ.get("ANISO_THREADS")
        if env:
            try:
                value = int(env)
            except ValueError:
                raise ValueError(f"ANISO_THREADS must be an integer, got {env!r}") from None
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise ValueError("threads must be >= 1")
    return int(value)


def _json_arg(text, name):
    try:
        return json.loads(text) if text else {}
    except json.JSONDecodeError as err:
        raise ValueError(f"{name}: invalid JSON ({err.msg})") from None


def _floats(text, name):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _rad(deg):
    return float(np.radians(deg))


def _manifest(args, outputs, inputs=(), seeds=None, path=None):
    """Write the run manifest; thread count and output locations are left
    out so identical configurations give identical manifests."""
    skip = {"threads", "func", "out", "out_dir", "rtheta", "report", "record_time"}
    config = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    man = {
        "version": __version__,
        "command": args.command,
        "config": config,
        "config_hash": config_hash(config),
        "seeds": seeds if seeds is not None else [getattr(args, "seed", None)],
        "inputs": {os.path.basename(f): file_digest(f) for f in inputs},
        "outputs": {os.path.basename(f): file_digest(f) for f in outputs},
    }
    if getattr(args, "record_time", False):
        man["wall_clock"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    if path is None:
        stem = os.path.splitext(outputs[0])[0]
        path = stem + ".manifest.json"
    write_json(path, man)
    return path


def _manifest_name(out):
    return os.path.basename(os.path.splitext(out)[0] + ".manifest.json")


def _load(args):
    return read_pattern(args.input, args.window)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    w = parse_window(args.window)
    if args.archetype == "regular":
        p = regular_archetype(args.seed, window=w)
    elif args.archetype == "clustered":
        p = clustered_archetype(args.seed, window=w)
    else:
        if not args.model:
            raise ValueError("model: give --model or --archetype")
        spec = model_from_dict(args.model, _json_arg(args.params, "params"))
        if args.compression is not None:
            t = GeometricTransform.compression(args.compression, _rad(args.angle), w.dim)
            p = simulate_transformed(spec, t, w, args.seed, margin=args.margin)
        else:
            p = simulate(spec, w, args.seed)
    write_pattern(args.out, p, manifest=_manifest_name(args.out))
    _manifest(args, [args.out])
    print(f"{p.n} points written to {args.out}")


def cmd_nn(args):
    p = _load(args)
    rows, header = None, None
    if args.stat == "orientation":
        c = orientation_density(p, bandwidth=_rad(args.bandwidth))
        header, rows = ["angle", "density"], np.column_stack([c.grid, c.values])
    elif args.stat == "directional":
        c = directional_distribution(p, args.r)
        header, rows = ["angle", "D"], np.column_stack([c.grid, c.values])
    else:
        grid = np.linspace(0, args.rmax, args.n_grid)
        cols = [grid]
        header = ["r"]
        for a in _floats(args.directions, "directions"):
            sec = SectorSpec(Direction.from_angle(_rad(a)), _rad(args.half_angle))
            fn = g_global if args.stat == "g_global" else g_local
            cols.append(fn(p, sec, grid).values)
            header.append(f"G_{a:g}")
        rows = np.column_stack(cols)
    write_csv(args.out, header, rows, [f"manifest: {_manifest_name(args.out)}"])
    _manifest(args, [args.out], [args.input])


def cmd_k2(args):
    p = _load(args)
    grid = np.linspace(args.rmin, args.rmax, args.n_grid)
    dirs = _floats(args.directions, "directions")
    hr = args.h_r
    # cylinder half-width defaults to 0.03 per unit of half the shortest side
    h_c = 0.015 * float(np.min(p.window.sides)) if args.h_c is None else args.h_c
    comments = [f"manifest: {_manifest_name(args.out)}"]
    if args.stat == "pcf":
        c = pcf_isotropic(p, grid, h_r=hr)
        header, rows = ["r", "g"], np.column_stack([grid, c.values])
    elif args.stat == "orientation":
        c = orientation_density_2nd(p, args.r1, args.r2,
                                    bandwidth=None if args.bandwidth is None else args.bandwidth)
        header, rows = ["angle", "density"], np.column_stack([c.grid, c.values])
    elif args.stat == "pcf_aniso":
        c = pcf_aniso(p, np.radians(dirs), grid, h_r=hr, h_a=_rad(args.half_angle))
        header = ["r"] + [f"g_{a:g}" for a in dirs]
        rows = np.column_stack([grid, c.values.T])
    else:
        header, cols = ["r"], [grid]
        for a in dirs:
            u = Direction.from_angle(_rad(a)) if p.dim == 2 else Direction(
                _floats(args.axis, "axis"))
            if args.stat == "conical_k":
                vals = k_measure(p, SectorSpec(u, _rad(args.half_angle)), grid).values
            elif args.stat == "cylindrical_k":
                if grid.min() <= h_c:
                    raise ValueError("cylindrical_k: --rmin must exceed --h-c")
                vals = k_measure(p, CylinderSpec(u, grid.max(), h_c), grid).values
            elif args.stat == "pcf_conical":
                vals = pcf_conical(p, SectorSpec(u, _rad(args.half_angle)), grid, h_r=hr).values
            elif args.stat == "pcf_cylindrical":
                vals = pcf_cylindrical(p, CylinderSpec(u, grid.max() + 1.0, h_c), grid,
                                       h_r=hr).values
            else:
                vals = pcf_guan(p, u, grid, h_d=hr).values
            cols.append(vals)
            header.append(f"{args.stat}_{a:g}")
        rows = np.column_stack(cols)
    write_csv(args.out, header, rows, comments)
    _manifest(args, [args.out], [args.input])


def _fit_summary(f):
    return {"level": f.info.get("level"), "semi_axes": f.semi_axes,
            "rotation_deg": np.degrees(f.rotation) if f.dim == 2 else None,
            "axes": f.axes, "sigma2": f.sigma2, "coef": f.coef, "coef_cov": f.coef_cov,
            "n_points": f.n_points, "noise_capped": f.info.get("noise_capped")}


def cmd_fry_ellipse(args):
    p = _load(args)
    fs = fry(p)
    contours, fits = [], []
    for lev in [int(v) for v in _floats(args.levels, "levels")]:
        c = pseudo_fry(fs, lev, half_angle=None if args.half_angle is None
                       else _rad(args.half_angle))
        contours.append(c)
    avg = average_rotation(contours, seed=args.seed)
    fits = avg.info["fits"]
    out = {"consensus": _fit_summary(avg), "fits": [_fit_summary(f) for f in fits],
           "manifest": _manifest_name(args.out)}
    if args.test:
        rep = ellipse_axis_test(fits, seed=args.seed)
        out["test"] = rep.to_dict()
    write_json(args.out, out)
    _manifest(args, [args.out], [args.input])


def _parse_smooth(text):
    if not text or text == "none":
        return None
    kind, _, val = text.partition(":")
    if kind == "gaussian":
        return {"method": "gaussian", "sigma": float(val or 1.0)}
    if kind in ("ma", "moving_average"):
        return {"method": "moving_average", "repeats": int(val or 1)}
    raise ValueError(f"smooth: unknown method {kind!r} (use gaussian:SIGMA or ma:REPEATS)")


def _spectral_tables(p, pmax, smoothing, standardize=False, level=0.95):
    grid = periodogram(p, pmax, standardize=standardize)
    if smoothing:
        grid = smooth(grid, **smoothing)
    rs, ts = r_spectrum(grid), theta_spectrum(grid)
    lam = grid.intensity
    rows = []
    for kind, c in (("R", rs), ("Theta", ts)):
        ok = c.counts > 0
        lo = np.full(c.grid.size, np.nan)
        hi = np.full(c.grid.size, np.nan)
        lo[ok], hi[ok] = chi2_envelope(c.counts[ok], level)
        for x, v, n, a, b in zip(c.grid, c.values, c.counts, lo * lam, hi * lam):
            rows.append([0 if kind == "R" else 1, x, v, n, a, b])
    return grid, rows


def cmd_spectral(args):
    p = _load(args)
    sm = _parse_smooth(args.smooth)
    grid, rt = _spectral_tables(p, args.pmax, sm, args.standardize)
    man = _manifest_name(args.out)
    write_csv(args.out, ["p1", "p2", "omega1", "omega2", "value"], grid.to_rows(),
              [f"manifest: {man}"])
    outs = [args.out]
    if args.rtheta:
        write_csv(args.rtheta, ["kind", "x", "value", "count", "lower", "upper"], rt,
                  [f"manifest: {man}", "kind 0 = R spectrum (x = r), 1 = Theta spectrum "
                   "(x = angle in degrees); lower/upper = chi-square band times intensity"])
        outs.append(args.rtheta)
    _manifest(args, outs, [args.input])


def cmd_wavelet(args):
    p = _load(args)
    man = _manifest_name(args.out)
    if args.method == "rosenberg":
        c = rosenberg_variance(p, border_margin=args.margin)
        write_csv(args.out, ["theta", "pbar"], np.column_stack([c.grid, c.values]),
                  [f"manifest: {man}"])
    else:
        scales = None if args.scales is None else _floats(args.scales, "scales")
        step = args.angle_step
        f = cwt(p, scales=scales, angles=np.radians(np.arange(step, 180 + 1e-9, step)),
                D=args.D, k0=_floats(args.k0, "k0"), resolution=args.resolution)
        e = energy(f)
        sc, an = np.meshgrid(e.grid, np.degrees(e.grid2), indexing="ij")
        write_csv(args.out, ["scale", "angle", "energy"],
                  np.column_stack([sc.ravel(), an.ravel(), e.values.ravel()]),
                  [f"manifest: {man}"])
    _manifest(args, [args.out], [args.input])


def cmd_test(args):
    inputs = args.input
    pats = [read_pattern(f, args.window) for f in inputs]
    p = pats[0]
    workers = thread_count(args.threads)
    null = _json_arg(args.null, "null") if args.null else None
    m = args.method
    if m in ("wong", "wavelet") and not null:
        raise ValueError("null: the Monte Carlo tests need --null '{\"model\": ...}'")
    if m == "guan":
        rep = guan_test(p, r=args.r, k=args.k, block_factor=args.block_factor)
    elif m == "wong":
        rep = wong_test(p, args.r, null, n_sims=args.sims, seed=args.seed, workers=workers)
    elif m == "wavelet":
        step = args.angle_step
        rep = wavelet_direction_test(p, null, n_sims=args.sims, seed=args.seed,
                                     angles=np.radians(np.arange(step, 180 + 1e-9, step)),
                                     workers=workers)
    elif m == "ellipse":
        fs = fry(p)
        contours = [pseudo_fry(fs, int(lev)) for lev in _floats(args.levels, "levels")]
        fits = [fit_ellipsoid(c) for c in contours]
        rep = ellipse_axis_test(fits, seed=args.seed)
    else:
        axis = None if args.axis in (None, "fry") else _rad(float(args.axis))
        rep = replicate_test(pats, statistic=args.statistic, r1=args.r1, r2=args.r2,
                             eps=_rad(args.half_angle), axis=axis)
    d = rep.to_dict()
    d["manifest"] = _manifest_name(args.report)
    write_json(args.report, d)
    _manifest(args, [args.report], inputs, seeds=[args.seed])
    pv = rep.p_value
    print(f"{rep.name}: p = {np.min(pv):.4g}" + (" (min over directions)" if np.ndim(pv) else ""))


# ---------------------------------------------------------------------------
# figure data


def _fig_task(task):
    """Compute one block of figure data; returns ``[(name, header, rows)]``."""
    arche, part, seed = task
    p = regular_archetype(seed) if arche == "regular" else clustered_archetype(seed)
    lam = p.intensity
    out = []
    pre = f"{arche}_"
    dirs = np.radians([0.0, 45.0, 90.0, 135.0])
    if part == "pattern":
        out.append((pre + "pattern", ["x", "y"], p.points))
        fs = fry(p)
        keep = np.linalg.norm(fs.vectors, axis=1) <= 0.3
        out.append((pre + "fry_points", ["dx", "dy"], fs.vectors[keep]))
    elif part == "nn":
        rec = nn_records(p)
        c = orientation_density(p, records=rec)
        out.append((pre + "nn_orientation_density", ["angle", "density"],
                    np.column_stack([c.grid, c.values])))
        c = directional_distribution(p, 0.1, records=rec)
        out.append((pre + "nn_directional_distribution", ["angle", "D"],
                    np.column_stack([c.grid, c.values])))
        grid = np.linspace(0, 0.2, 81)
        cols_g, cols_l = [grid], [grid]
        for a in dirs:
            sec = SectorSpec(Direction.from_angle(a), np.pi / 8)
            cols_g.append(g_global(p, sec, grid, records=rec).values)
            cols_l.append(g_local(p, sec, grid).values)
        hdr = ["r"] + [f"dir_{d:g}" for d in np.degrees(dirs)]
        out.append((pre + "nn_g_global", hdr, np.column_stack(cols_g)))
        out.append((pre + "nn_g_local", hdr, np.column_stack(cols_l)))
    elif part == "k":
        grid = np.linspace(0.0, 0.25, 51)
        hdr = ["r"] + [f"dir_{d:g}" for d in np.degrees(dirs)]
        gcyl = grid[grid > 0.03]
        cols_c, cols_y = [grid], [gcyl]
        for a in dirs:
            u = Direction.from_angle(a)
            cols_c.append(k_measure(p, SectorSpec(u, np.pi / 8), grid).values)
            cols_y.append(k_measure(p, CylinderSpec(u, 0.25, 0.03), gcyl).values)
        out.append((pre + "k_conical", hdr, np.column_stack(cols_c)))
        out.append((pre + "k_cylindrical", hdr, np.column_stack(cols_y)))
        for r1, r2 in ((0.0, 0.1), (0.1, 0.2)):
            c = orientation_density_2nd(p, r1, r2, bandwidth=3 / np.sqrt(lam))
            out.append((pre + f"orientation_density_{r1:g}_{r2:g}", ["angle", "density"],
                        np.column_stack([c.grid, c.values])))
    elif part == "pcf":
        grid = np.linspace(0.01, 0.25, 49)
        hr = 0.3 / np.sqrt(lam)
        hdr = ["r"] + [f"dir_{d:g}" for d in np.degrees(dirs)]
        c = pcf_aniso(p, dirs, grid, h_r=hr, h_a=np.pi / 8)
        out.append((pre + "pcf_aniso", hdr, np.column_stack([grid, c.values.T])))
        cols_c, cols_y = [grid], [grid]
        for a in dirs:
            u = Direction.from_angle(a)
            cols_c.append(pcf_conical(p, SectorSpec(u, np.pi / 8), grid, h_r=hr).values)
            cols_y.append(pcf_cylindrical(p, CylinderSpec(u, 1.0, 0.03), grid, h_r=hr).values)
        out.append((pre + "pcf_conical", hdr, np.column_stack(cols_c)))
        out.append((pre + "pcf_cylindrical", hdr, np.column_stack(cols_y)))
    elif part == "ellipse":
        levels = range(3, 10) if arche == "regular" else range(100, 201, 25)
        fs = fry(p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            contours = [pseudo_fry(fs, lev) for lev in levels]
            avg = average_rotation(contours, seed=seed)
        rows = []
        for c in contours:
            pts = c.points
            rows.extend([[c.level, x, y] for x, y in pts])
        out.append((pre + "ellipse_contours", ["level", "x", "y"], np.array(rows)))
        fit_rows = [[f.info["level"], f.semi_axes[0], f.semi_axes[1], np.degrees(f.rotation)]
                    for f in avg.info["fits"]]
        fit_rows.append([-1, avg.semi_axes[0], avg.semi_axes[1], np.degrees(avg.rotation)])
        out.append((pre + "ellipse_fits", ["level", "major", "minor", "rotation_deg"],
                    np.array(fit_rows)))
    elif part == "spectral":
        sigma = 2.0 if arche == "regular" else 1.0
        raw = periodogram(p)
        sm = smooth(raw, sigma=sigma)
        out.append((pre + "periodogram", ["p1", "p2", "omega1", "omega2", "value"],
                    raw.to_rows()))
        out.append((pre + "periodogram_smoothed", ["p1", "p2", "omega1", "omega2", "value"],
                    sm.to_rows()))
        for tag, g in (("raw", None), ("smoothed", {"method": "gaussian", "sigma": sigma})):
            _, rows = _spectral_tables(p, 16, g)
            out.append((pre + f"spectra_{tag}", ["kind", "x", "value", "count", "lower",
                                                  "upper"], np.array(rows)))
    elif part == "rosenberg":
        c = rosenberg_variance(p)
        out.append((pre + "rosenberg", ["theta", "pbar"], np.column_stack([c.grid, c.values])))
    elif part == "cwt":
        e = energy(cwt(p))
        sc, an = np.meshgrid(e.grid, np.degrees(e.grid2), indexing="ij")
        out.append((pre + "cwt_energy", ["scale", "angle", "energy"],
                    np.column_stack([sc.ravel(), an.ravel(), e.values.ravel()])))
    return out


FIGURE_PARTS = ("pattern", "nn", "k", "pcf", "ellipse", "spectral", "rosenberg", "cwt")


def cmd_reproduce(args):
    os.makedirs(args.out_dir, exist_ok=True)
    parts = FIGURE_PARTS if not args.parts else tuple(args.parts.split(","))
    bad = [q for q in parts if q not in FIGURE_PARTS]
    if bad:
        raise ValueError(f"parts: unknown {bad}; choose from {FIGURE_PARTS}")
    tasks = [(a, q, args.seed) for a in ("regular", "clustered") for q in parts]
    workers = min(thread_count(args.threads), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_fig_task, tasks))
    else:
        results = [_fig_task(t) for t in tasks]
    outputs = []
    for block in results:
        for name, header, rows in block:
            path = os.path.join(args.out_dir, name + ".csv")
            write_csv(path, header, rows, ["manifest: manifest.json"])
            outputs.append(path)
    _manifest(args, outputs, seeds=[args.seed], path=os.path.join(args.out_dir, "manifest.json"))
    print(f"{len(outputs)} files written to {args.out_dir}")


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: $ANISO_THREADS or all cores)")
    common.add_argument("--record-time", action="store_true",
                        help="store the wall-clock time in the manifest")
    pin = argparse.ArgumentParser(add_help=False)
    pin.add_argument("--input", required=True, help="pattern CSV (columns x,y[,z])")
    pin.add_argument("--window", default=None,
                     help="x0,x1,y0,y1[,z0,z1]; needed when the CSV has no window line")

    ap = _Parser(prog="aniso", description="Directional analysis of spatial point patterns.",
                 parents=[common])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate a point pattern")
    s.add_argument("--model", help="poisson, strauss, maternii, thomas or linestripes")
    s.add_argument("--params", default="{}", help="model parameters as JSON")
    s.add_argument("--archetype", choices=["regular", "clustered"])
    s.add_argument("--window", default="-1,1,-1,1")
    s.add_argument("--compression", type=float, help="geometric compression factor")
    s.add_argument("--angle", type=float, default=0.0, help="rotation after compression (deg)")
    s.add_argument("--margin", type=float, default=0.0, help="simulation margin")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("nn", parents=[common, pin], help="nearest-neighbour summaries")
    s.add_argument("--stat", choices=["orientation", "directional", "g_global", "g_local"],
                   default="orientation")
    s.add_argument("--bandwidth", type=float, default=22.5, help="kernel half-width (deg)")
    s.add_argument("--r", type=float, default=0.1, help="range for the directional distribution")
    s.add_argument("--directions", default="0,45,90,135", help="sector directions (deg)")
    s.add_argument("--half-angle", type=float, default=22.5, help="sector half-angle (deg)")
    s.add_argument("--rmax", type=float, default=0.2)
    s.add_argument("--n-grid", type=int, default=81)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_nn)

    s = sub.add_parser("k2", parents=[common, pin], help="second-order summaries")
    s.add_argument("--stat", default="pcf",
                   choices=["pcf", "orientation", "pcf_aniso", "conical_k", "cylindrical_k",
                            "pcf_conical", "pcf_cylindrical", "pcf_guan"])
    s.add_argument("--rmin", type=float, default=0.01)
    s.add_argument("--rmax", type=float, default=0.25)
    s.add_argument("--n-grid", type=int, default=49)
    s.add_argument("--directions", default="0,45,90,135", help="directions (deg)")
    s.add_argument("--axis", default="0,0,1", help="3D direction vector")
    s.add_argument("--half-angle", type=float, default=22.5, help="cone half-angle (deg)")
    s.add_argument("--h-c", type=float, default=None,
                   help="cylinder half-width (default 0.015 x shortest side)")
    s.add_argument("--h-r", type=float, default=None, help="range bandwidth")
    s.add_argument("--r1", type=float, default=0.0)
    s.add_argument("--r2", type=float, default=0.1)
    s.add_argument("--bandwidth", type=float, default=None, help="angular bandwidth (rad)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_k2)

    s = sub.add_parser("fry-ellipse", parents=[common, pin], help="Fry contour ellipses")
    s.add_argument("--levels", default="3,4,5,6,7,8,9")
    s.add_argument("--half-angle", type=float, default=None, help="sector half-angle (deg)")
    s.add_argument("--test", action="store_true", help="add the semi-axis test")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fry_ellipse)

    s = sub.add_parser("spectral", parents=[common, pin], help="periodogram and spectra")
    s.add_argument("--pmax", type=int, default=16)
    s.add_argument("--smooth", default="none", help="none, gaussian:SIGMA or ma:REPEATS")
    s.add_argument("--standardize", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--rtheta", default=None, help="CSV for the R and Theta spectra")
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("wavelet", parents=[common, pin], help="wavelet summaries")
    s.add_argument("--method", choices=["rosenberg", "cwt"], default="rosenberg")
    s.add_argument("--margin", type=float, default=None, help="focal point border margin")
    s.add_argument("--scales", default=None, help="CWT scales (comma separated)")
    s.add_argument("--angle-step", type=float, default=1.0, help="CWT angle step (deg)")
    s.add_argument("--D", type=float, default=0.1)
    s.add_argument("--k0", default="0,5.5")
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_wavelet)

    s = sub.add_parser("test", parents=[common], help="isotropy tests")
    s.add_argument("--method", required=True,
                   choices=["guan", "wong", "replicate", "ellipse", "wavelet"])
    s.add_argument("--input", required=True, nargs="+", help="pattern CSV(s)")
    s.add_argument("--window", default=None)
    s.add_argument("--null", default=None, help='null model JSON, e.g. {"model": "poisson", '
                   '"lambda": 100}')
    s.add_argument("--sims", type=int, default=199)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--r", type=float, default=0.1, help="lag length or sector radius")
    s.add_argument("--k", type=int, default=4, help="number of lag directions")
    s.add_argument("--block-factor", type=float, default=0.8)
    s.add_argument("--levels", default="3,4,5")
    s.add_argument("--angle-step", type=float, default=1.0)
    s.add_argument("--statistic", default="conical_k",
                   choices=["conical_k", "g_local", "g_global"])
    s.add_argument("--r1", type=float, default=0.0)
    s.add_argument("--r2", type=float, default=0.15)
    s.add_argument("--half-angle", type=float, default=22.5)
    s.add_argument("--axis", default="fry", help="2D third axis: 'fry' or an angle (deg)")
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("reproduce-figures", parents=[common],
                       help="data behind the example figures for both archetypes")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--out-dir", default="figures")
    s.add_argument("--parts", default=None, help=f"subset of {','.join(FIGURE_PARTS)}")
    s.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        args.func(args)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, FileNotFoundError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
