"""Command-line front end.

Exit codes: 0 the checked inequality or certificate holds, 1 usage or
parameter error, 2 the check failed, 3 a numerical method failed.
"""

import argparse
import csv
import io
import json
import math
import os
import re
import sys

import numpy as np

from . import closed_form as cf
from . import comparisons as cmp
from . import matrix_core as mc
from . import regularity as reg
from .errors import DivergenceError, IterationLimitError, ParameterError, TruncLapError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_NUMERIC = 0, 1, 2, 3

_LENGTH = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*(pi)?\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_length(text):
    """Number, or a multiple / fraction of pi: ``2``, ``pi``, ``2pi``, ``pi/128``, ``3*pi/2``."""
    m = _LENGTH.match(str(text))
    if not m or (not m.group(1) and not m.group(2)):
        raise argparse.ArgumentTypeError(f"cannot read length {text!r}")
    try:
        value = float(m.group(1)) if m.group(1) else 1.0
        if m.group(2):
            value *= math.pi
        if m.group(3):
            value /= float(m.group(3))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot read length {text!r}") from exc
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"length must be positive, got {text!r}")
    return value


def parse_floats(text):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def parse_ints(text):
    """``2,3,5`` or a range ``2-10``."""
    s = str(text)
    try:
        if "-" in s and "," not in s:
            lo, hi = s.split("-")
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from exc


# --- output -----------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return f"{x:.17g}" if math.isfinite(x) else "null"
    if x is None:
        return "null"
    return json.dumps(str(x))


def to_json(obj, indent=0):
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_fmt(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    return _fmt(obj)


def _cell(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return "" if v is None else str(v)


def to_csv(report):
    """Header row plus data: the ``rows`` table when present, else one row of scalars."""
    rows = report.get("rows")
    if not rows:
        rows = [{k: v for k, v in report.items() if k not in ("config", "rows")}]
    keys = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in keys])
    return buf.getvalue()


def emit(report, args):
    text = to_json(report) + "\n" if args.format == "json" else to_csv(report)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _config(args):
    skip = {"func", "plot_func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# --- subcommands ------------------------------------------------------------

def cmd_eigen_closed(args):
    r = args.side / 2.0
    if args.cube:
        if args.k != 1:
            raise ParameterError("the closed-form cube pair solves P+_1; use -k 1")
        pair = cf.cube_eigenpair(args.n, r)
        name = "cube"
    elif args.rect:
        pair = cf.rect_eigenpair(cf.BoxSpec(len(args.rect), r, tuple(args.rect)))
        name = "rect"
    else:
        if args.rho is None:
            raise ParameterError("--ball needs --rho")
        pair = cf.ball_eigenpair(args.n, args.k, args.rho)
        name = "ball"
    x = cf.sample_interior(pair.domain, args.samples, args.seed)
    res = np.abs(cf.residual(pair, x))
    block = max(1, len(x) // 10)
    rows = [
        {"block": i, "points": int(len(chunk)), "max_abs_residual": float(chunk.max())}
        for i, chunk in enumerate(np.array_split(res, max(1, len(x) // block)))
    ]
    bound = args.residual_tol * max(1.0, pair.mu)
    report = {
        "domain": name,
        "dim": pair.dim,
        "order": pair.order,
        "mu": pair.mu,
        "exponents": list(pair.exponents) if pair.exponents is not None else None,
        "samples": int(len(x)),
        "max_abs_residual": float(res.max()),
        "residual_bound": bound,
        "passed": bool(res.max() <= bound),
        "rows": rows,
    }
    if args.plot:
        from .plotting import eigenfunction_plot

        eigenfunction_plot(args.plot, pair)
    return report, report["passed"]


def _numeric_problem(args):
    from .pde_solver import GridDomain, Polytope, ball_grid, box_grid

    r = args.side / 2.0
    if args.disc:
        rho = args.rho if args.rho is not None else r
        exact = cf.ball_eigenpair(2, 1, rho).mu
        return (lambda h: ball_grid(2, rho, h)), exact, {"domain": "disc", "rho": rho}
    if args.polygon:
        poly = Polytope.regular_polygon(args.polygon, r)
        return (lambda h: GridDomain(poly, h)), None, {"domain": "polygon", "sides": args.polygon}
    alpha = tuple(args.rect) if args.rect else (1.0, 1.0)
    spec = cf.BoxSpec(2, r, alpha)
    exact = cf.rect_eigenpair(spec).mu
    return (lambda h: box_grid(spec, h)), exact, {"domain": "rect" if args.rect else "square", "alpha": list(alpha)}


def cmd_eigen_numeric(args):
    from .pde_solver import DirectionSet, EigenConfig, SolverConfig, Stencil, eigen_inverse_power, write_binary

    make_grid, exact, info = _numeric_problem(args)
    solver = SolverConfig(method=args.method, tol=args.solver_tol, max_iter=args.max_iter,
                          tau=args.tau, threads=args.threads)
    ecfg = EigenConfig(tol=args.tol, max_iter=args.eigen_max_iter, solver=solver)
    dirs = DirectionSet(args.order, 2)
    spacings = [args.h / 2**i for i in range(args.refine)] if args.refine else [args.h]
    rows, last = [], None
    for h in spacings:
        st = Stencil(make_grid(h), dirs)
        est = eigen_inverse_power(st, ecfg)
        row = {"h": h, "nodes": st.size, "mu_h": est.mu_h, "iterations": est.iterations}
        if exact is not None:
            row["rel_error"] = abs(est.mu_h - exact) / exact
        rows.append(row)
        last = est
    report = dict(info)
    report.update({
        "order": args.order,
        "directions": len(dirs),
        "h": spacings[-1],
        "mu_h": last.mu_h,
        "mu_exact": exact,
        "iterations": last.iterations,
        "mu_history": last.mu_history,
        "residual_history": last.residual_history,
    })
    passed = True
    if exact is not None:
        report["rel_error"] = rows[-1]["rel_error"]
        report["rel_tol"] = args.rel_tol
        passed = rows[-1]["rel_error"] <= args.rel_tol
        if len(rows) > 1:
            errs = [r["rel_error"] for r in rows]
            report["error_monotone"] = all(b < a for a, b in zip(errs, errs[1:]))
            passed = passed and report["error_monotone"]
    report["passed"] = bool(passed)
    report["rows"] = rows
    if args.snapshot:
        write_binary(last.eigenfield, args.snapshot)
        report["snapshot"] = args.snapshot
    if args.plot:
        from .plotting import field_plot, line_plot

        if len(rows) > 1 and exact is not None:
            line_plot(args.plot, [r["h"] for r in rows], {"relative error": [r["rel_error"] for r in rows]},
                      "h", "|mu_h - mu| / mu", logx=True, logy=True)
        else:
            g = last.eigenfield.grid
            field_plot(args.plot, last.eigenfield.full(), g.lo, g.hi,
                       title=f"mu_h = {last.mu_h:.6g}", mask=g.inside.reshape(g.shape))
    return report, report["passed"]


def cmd_fk(args):
    rng = np.random.default_rng(args.seed)
    r = args.side / 2.0
    if args.random:
        alphas = [cmp.normalize_alpha(np.exp(rng.uniform(-1.5, 1.5, args.n))) for _ in range(args.random)]
    else:
        a = np.asarray(args.alpha if args.alpha else [1.0] * args.n, dtype=float)
        alphas = [cmp.normalize_alpha(a) if args.normalize else a]
    rows = []
    for a in alphas:
        rep = cmp.fk_check(a, r)
        rows.append({
            "alpha": list(rep.alpha),
            "mu_rect": rep.mu_rect,
            "mu_cube": rep.mu_cube,
            "harmonic_mean": rep.harmonic_mean,
            "geometric_mean": rep.geometric_mean,
            "is_equality": rep.is_equality,
            "holds": rep.holds,
        })
    passed = all(row["holds"] for row in rows)
    report = dict(rows[0]) if len(rows) == 1 else {
        "count": len(rows),
        "equality_count": sum(row["is_equality"] for row in rows),
        "max_ratio": max(row["mu_rect"] / row["mu_cube"] for row in rows),
    }
    report["passed"] = passed
    if len(rows) > 1:
        report["rows"] = rows
    if args.plot and len(rows) > 1:
        from .plotting import line_plot

        ratio = sorted(row["mu_rect"] / row["mu_cube"] for row in rows)
        line_plot(args.plot, np.arange(len(ratio)), {"mu_rect / mu_cube": ratio}, "sample (sorted)", "ratio")
    return report, passed


def cmd_fk2(args):
    rows = []
    for n in args.dims:
        rep = cmp.fk2_check(n, args.side / 2.0)
        rows.append({
            "dim": n,
            "rho": rep.rho,
            "mu_ball": rep.mu_ball,
            "mu_cube": rep.mu_cube,
            "ratio": rep.ratio,
            "ratio_formula": n * cmp.unit_ball_volume(n) ** (2.0 / n) / 4.0,
            "holds": rep.holds,
        })
    passed = all(row["holds"] for row in rows)
    report = {"dims": list(args.dims), "min_ratio": min(row["ratio"] for row in rows), "passed": passed, "rows": rows}
    if args.plot:
        from .plotting import line_plot

        line_plot(args.plot, list(args.dims), {"mu_ball / mu_cube": [row["ratio"] for row in rows]}, "N", "ratio")
    return report, passed


def cmd_lieb(args):
    r = args.side / 2.0
    a = args.alpha
    if len(a) == 2:
        rep = cmp.lieb_reversal_2d(a[0], a[1], r, squared=args.squared)
    else:
        rep = cmp.lieb_reversal_nd(a, r, squared=args.squared)
    half_a = [r / v for v in rep.alpha]
    swapped = list(rep.alpha)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    half_b = [r / v for v in swapped]
    report = {
        "dim": rep.dim,
        "alpha": list(rep.alpha),
        "scale": rep.scale,
        "inf_coef": str(rep.inf_coef),
        "sum_coef": str(rep.mu_a_coef + rep.mu_b_coef),
        "mu_intersection_inf": rep.mu_intersection_inf,
        "mu_a": rep.mu_a,
        "mu_b": rep.mu_b,
        "mu_sum": rep.mu_a + rep.mu_b,
        "grid_search_inf": cmp.intersection_inf_search(half_a, half_b, args.resolution),
        "reversed": rep.reversed,
    }
    return report, rep.reversed


def cmd_counterexample(args):
    cert = cf.product_counterexample(args.n, args.k, args.side / 2.0, args.a, args.b)
    report = {
        "dim": cert.dim,
        "order": cert.order,
        "point": list(cert.point),
        "frame": [list(v) for v in cert.frame.vectors],
        "gamma_sq": cert.gamma_sq,
        "mu": cert.mu,
        "u_value": cert.u_value,
        "residual_lower_bound": cert.residual_lower_bound,
        "bound_over_u": cert.residual_lower_bound / cert.u_value,
        "frame_residual": cert.frame_residual,
        "pk_residual": cert.pk_residual,
        "w1_quadratic": cert.w1_quadratic,
        "verified": cert.verified,
    }
    passed = cert.verified
    if args.frames:
        pair = cf.product_candidate(args.n, args.k, args.side / 2.0)
        h = pair.hessian(cert.point)
        frames = mc.random_frames(args.n, args.k, args.frames, np.random.default_rng(args.seed))
        brute = float(mc.frame_sums(h, frames).max())
        report["brute_force_frames"] = args.frames
        report["brute_force_max"] = brute
        report["pk_plus"] = float(mc.pk_plus(h, args.k))
        report["sandwich"] = bool(brute <= report["pk_plus"] + 1e-12 * max(1.0, abs(report["pk_plus"])))
        passed = passed and report["sandwich"]
    report["passed"] = bool(passed)
    return report, passed


def cmd_holder(args):
    from .pde_solver import Polytope

    poly = Polytope.regular_polygon(args.polygon, args.circumradius)
    cover = reg.build_cube_cover(poly)
    bar = reg.barrier(cover, args.alpha, args.beta)
    x = reg.sample_polytope(poly, args.samples, args.seed)
    sup = bar.supersolution_check(x)
    rng = np.random.default_rng(args.seed)
    edge = reg.sample_boundary(poly, args.samples, args.seed)
    q = np.concatenate([bar.holder_quotients(x, x[rng.permutation(len(x))]),
                        bar.holder_quotients(x, edge[: len(x)])])
    boundary_max = float(np.abs(bar(edge)).max())
    boundary_phi = float(np.abs(cover.inf_phi(edge)).max())
    report = {
        "sides": args.polygon,
        "cubes": len(cover),
        "alpha": args.alpha,
        "beta": args.beta,
        "samples": int(len(x)),
        "supersolution_holds": sup.holds,
        "max_violation": sup.max_violation,
        "holder_exponent": bar.holder_exponent,
        "holder_max_quotient": float(q.max()),
        "holder_bound": bar.holder_constant,
        "barrier_boundary_max": boundary_max,
        "inf_phi_boundary_max": boundary_phi,
    }
    passed = sup.holds and report["holder_max_quotient"] <= bar.holder_constant and boundary_phi <= 1e-7
    if args.fit_dim:
        r = math.pi / 2.0
        pair = cf.cube_eigenpair(args.fit_dim, r)
        face = np.zeros(args.fit_dim)
        face[0] = r
        normal = np.zeros(args.fit_dim)
        normal[0] = -1.0
        slope = reg.holder_exponent_fit(pair.u, face, normal, window=1e-2)
        report["fit_dim"] = args.fit_dim
        report["fitted_exponent"] = slope
        report["fit_rel_error"] = abs(slope * args.fit_dim - 1.0)
        passed = passed and report["fit_rel_error"] <= 0.05
    report["passed"] = bool(passed)
    if args.plot:
        from .plotting import field_plot

        lo, hi = poly.bounds
        t = [np.linspace(lo[i], hi[i], 121) for i in range(2)]
        gx, gy = np.meshgrid(*t, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        inside = poly.contains(pts)
        vals = np.zeros(len(pts))
        vals[inside] = bar(pts[inside])
        field_plot(args.plot, vals.reshape(gx.shape), lo, hi, title="barrier", mask=inside.reshape(gx.shape))
    return report, passed


def cmd_remark(args):
    rep = reg.remark_counterexample(args.n, args.sigma, args.samples, args.directions, args.seed)
    rows = [
        dict({"distance": d}, **{f"quotient_gamma_{g}": rep.quotients[g][i] for g in rep.quotients})
        for i, d in enumerate(rep.distances)
    ]
    monotone = {str(g): rep.growth_monotone(g) for g in rep.quotients}
    report = {
        "dim": rep.dim,
        "sigma": rep.sigma,
        "concavity_threshold": reg.concavity_threshold(rep.dim),
        "u_center": rep.u_center,
        "max_quadratic_form": rep.max_quadratic_form,
        "max_eigenvalue": rep.max_eigenvalue,
        "concave": rep.concave,
        "growth_monotone": monotone,
        "passed": bool(rep.concave and all(monotone.values())),
        "rows": rows,
    }
    if args.plot:
        from .plotting import line_plot

        line_plot(args.plot, rep.distances, {f"gamma={g}": rep.quotients[g] for g in rep.quotients},
                  "distance to face", "u / d^gamma", logx=True)
    return report, report["passed"]


def cmd_explore_negative(args):
    from .pde_solver import DirectionSet, SolverConfig, Stencil, explore_negative_forcing, square_grid

    dirs = DirectionSet(args.order, 2)
    stencils = [Stencil(square_grid(args.side, h), dirs) for h in (args.h / 2**i for i in range(args.refine))]
    cfg = SolverConfig(method=args.method, max_iter=args.max_iter, threads=args.threads)
    rows = explore_negative_forcing(stencils, args.value, cfg)
    report = {"value": args.value, "side": args.side, "order": args.order, "rows": rows}
    if args.plot:
        from .plotting import line_plot

        line_plot(args.plot, [r["h"] for r in rows], {"sup |u|": [r["sup_u"] for r in rows]}, "h", "sup |u|", logx=True)
    # Exploratory: no inequality is asserted.
    return report, True


# --- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads_default():
    env = os.environ.get("TRUNCLAP_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $TRUNCLAP_THREADS or 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", default=None, help="report path (default: stdout)")
    common.add_argument("--plot", default=None, help="also write a PNG figure here")

    p = _Parser(prog="trunclap", description="Truncated Laplacian eigenvalue tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eigen-closed", parents=[common], help="closed-form eigenpair with residual audit")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--cube", action="store_true")
    g.add_argument("--rect", type=parse_floats, metavar="A1,A2,...")
    g.add_argument("--ball", action="store_true")
    s.add_argument("-n", type=int, default=2)
    s.add_argument("-k", type=int, default=1)
    s.add_argument("--side", type=parse_length, default=math.pi, help="box side length 2R")
    s.add_argument("--rho", type=parse_length, default=None)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--residual-tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_eigen_closed)

    s = sub.add_parser("eigen-numeric", parents=[common], help="discrete principal eigenvalue")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--square", action="store_true")
    g.add_argument("--rect", type=parse_floats, metavar="A1,A2")
    g.add_argument("--disc", action="store_true")
    g.add_argument("--polygon", type=int, metavar="SIDES")
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.add_argument("--rho", type=parse_length, default=None)
    s.add_argument("--h", type=parse_length, default=math.pi / 32)
    s.add_argument("--order", "-r", type=int, default=4)
    s.add_argument("--method", choices=("howard", "explicit"), default="howard")
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--solver-tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--eigen-max-iter", type=int, default=400)
    s.add_argument("--refine", type=int, default=0, help="sweep h, h/2, ... over this many levels")
    s.add_argument("--rel-tol", type=float, default=0.05)
    s.add_argument("--snapshot", default=None, help="write the eigenfield in the binary grid layout")
    s.set_defaults(func=cmd_eigen_numeric)

    s = sub.add_parser("fk", parents=[common], help="box versus equal-volume cube")
    s.add_argument("--alpha", type=parse_floats, default=None)
    s.add_argument("-n", type=int, default=2)
    s.add_argument("--normalize", action="store_true", help="rescale alpha to unit product")
    s.add_argument("--random", type=int, default=0, help="check this many random alpha instead")
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.set_defaults(func=cmd_fk)

    s = sub.add_parser("fk2", parents=[common], help="ball versus equal-volume cube")
    s.add_argument("--dims", type=parse_ints, default=list(range(2, 11)))
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.set_defaults(func=cmd_fk2)

    s = sub.add_parser("lieb", parents=[common], help="reversed Lieb inequality for two boxes")
    s.add_argument("--alpha", type=parse_floats, required=True)
    s.add_argument("--squared", action="store_true", help="--alpha gives alpha_i^2")
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.add_argument("--resolution", type=int, default=41)
    s.set_defaults(func=cmd_lieb)

    s = sub.add_parser("counterexample", parents=[common], help="product candidate fails for 2 <= k <= N-1")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("-k", type=int, required=True)
    s.add_argument("-a", type=float, default=1.0)
    s.add_argument("-b", type=float, default=2.0)
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.add_argument("--frames", type=int, default=10000, help="random frames for the brute-force check")
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("holder", parents=[common], help="barrier supersolution and Hölder bound")
    s.add_argument("--polygon", type=int, default=6)
    s.add_argument("--circumradius", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--fit-dim", type=int, default=0, help="also fit the cube eigenfunction exponent in this N")
    s.set_defaults(func=cmd_holder)

    s = sub.add_parser("remark", parents=[common], help="concave supersolution without a Hölder bound")
    s.add_argument("-n", type=int, default=2)
    s.add_argument("--sigma", type=float, default=None, help="default 2n")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--directions", type=int, default=1000)
    s.set_defaults(func=cmd_remark)

    s = sub.add_parser("explore-negative", parents=[common], help="exploratory: F(u) = const < 0 under refinement")
    s.add_argument("--value", type=float, default=-1.0)
    s.add_argument("--side", type=parse_length, default=math.pi)
    s.add_argument("--h", type=parse_length, default=math.pi / 16)
    s.add_argument("--refine", type=int, default=3)
    s.add_argument("--order", "-r", type=int, default=3)
    s.add_argument("--method", choices=("howard", "explicit"), default="howard")
    s.add_argument("--max-iter", type=int, default=200)
    s.set_defaults(func=cmd_explore_negative)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.threads is None:
        args.threads = _threads_default()
    if args.threads < 1:
        print("trunclap: error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    config = _config(args)
    try:
        report, passed = args.func(args)
    except (IterationLimitError, DivergenceError) as exc:
        failure = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": config,
                   "error": str(exc), "history": list(exc.history)}
        sys.stderr.write(to_json(failure) + "\n")
        return EXIT_NUMERIC
    except (ParameterError, argparse.ArgumentTypeError) as exc:
        print(f"trunclap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncLapError as exc:
        print(f"trunclap {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": config}
    out.update(report)
    emit(out, args)
    if not passed:
        print(f"trunclap {args.command}: check failed", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
