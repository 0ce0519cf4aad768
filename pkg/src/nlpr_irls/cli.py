"""Command-line interface: ``nlpr-irls {denoise,bench-solvers,trace,verify}``.

Exit codes: 0 success, 1 invalid arguments, 2 I/O failure, 3 invariant
failure (``verify`` only).
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from . import baselines, imageio, irls, nlpr, surrogate, sweep
from .exceptions import DegenerateDenominatorError, InsufficientDataError
from .imageio import read_image, to_uint8, write_image
from .lpcore import AnchorSet, LpParams

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3
REPORT_SCHEMA = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_instance_args(p):
    g = p.add_argument_group("instance")
    g.add_argument("--anchors", help="points separated by ';', coordinates by ',' (e.g. '0;1;10')")
    g.add_argument("--weights", help="comma-separated positive weights (default: all 1)")
    g.add_argument("--random", nargs=3, type=int, metavar=("D", "N", "SEED"),
                   help="random instance of dimension D with N anchors")
    g.add_argument("--instance", help="JSON file with 'anchors' and optional 'weights'")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-6)


def build_parser():
    parser = _Parser(prog="nlpr-irls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a grayscale PGM/PNG image")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--p", type=float, default=1.0)
    d.add_argument("--eps", type=float, default=1e-6)
    d.add_argument("--patch-size", type=int, default=7)
    d.add_argument("--search-radius", type=int, default=10)
    d.add_argument("--h", type=float, help="NLM smoothing (default: 10 * sigma)")
    d.add_argument("--max-iters", type=int, default=500)
    d.add_argument("--step-tol", type=float)
    d.add_argument("--init", choices=["nlm", "noisy"], default="nlm")
    d.add_argument("--eps-schedule", choices=["fixed", "geometric"], default="fixed")
    d.add_argument("--sigma", type=float, default=0.0,
                   help="add Gaussian noise of this level before denoising")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--nlm", action="store_true", help="run plain non-local means instead")
    d.add_argument("--clean", help="clean reference image for PSNR in the report")
    d.add_argument("--report", help="write a JSON summary here")
    d.add_argument("--workers", type=int, default=1)

    b = sub.add_parser("bench-solvers", help="compare IRLS, Newton and gradient descent")
    _add_instance_args(b)
    b.add_argument("--solvers", default="irls,newton,gd")
    b.add_argument("--x0", help="comma-separated start point (default: NLM init)")
    b.add_argument("--far", type=float,
                   help="start FAR * spread away from the anchor centroid along (1,...,1)")
    b.add_argument("--max-iters", type=int, default=500)
    b.add_argument("--line-search", action="store_true",
                   help="backtracking for Newton (gradient descent always backtracks)")
    b.add_argument("--no-timing", action="store_true", help="leave wall_time blank")

    t = sub.add_parser("trace", help="IRLS trace with rate diagnostics as CSV")
    _add_instance_args(t)
    t.add_argument("--x0", help="comma-separated start point (default: NLM init)")
    t.add_argument("--max-iters", type=int, default=500)
    t.add_argument("--step-tol", type=float)

    v = sub.add_parser("verify", help="run the invariant sweep")
    v.add_argument("--sweep", choices=sorted(sweep.SWEEPS), default="default")
    v.add_argument("--seed", type=int, default=0)
    return parser


def _params(args) -> LpParams:
    try:
        return LpParams(args.p, args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _vector(text, d=None):
    try:
        v = np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise UsageError(f"bad vector {text!r}") from None
    if d is not None and v.size != d:
        raise UsageError(f"vector {text!r} has dimension {v.size}, expected {d}")
    return v


def _instance(args) -> AnchorSet:
    given = [args.anchors is not None, args.random is not None, args.instance is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --anchors, --random, --instance")
    try:
        if args.random is not None:
            d, n, seed = args.random
            if d < 1 or n < 1:
                raise UsageError("--random needs D >= 1 and N >= 1")
            rng = np.random.default_rng(seed)
            return AnchorSet(rng.normal(size=(n, d)), rng.uniform(0.1, 1.0, size=n))
        if args.instance is not None:
            try:
                with open(args.instance) as fh:
                    data = json.load(fh)
            except OSError as exc:
                raise OSError(f"cannot read instance: {exc}") from exc
            return AnchorSet(data["anchors"], data.get("weights"))
        pts = [_vector(chunk) for chunk in args.anchors.split(";")]
        if len({p.size for p in pts}) != 1:
            raise UsageError("anchors differ in dimension")
        w = _vector(args.weights) if args.weights else None
        return AnchorSet(np.vstack(pts), w)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad instance: {exc}") from None


def _x0(args, s):
    if getattr(args, "far", None) is not None:
        return s.anchors.mean(axis=0) + args.far * s.spread * np.ones(s.d)
    if args.x0:
        return _vector(args.x0, s.d)
    return None


def cmd_denoise(args, out):
    params = _params(args)
    if args.sigma < 0:
        raise UsageError("--sigma must be >= 0")
    h = args.h if args.h is not None else 10.0 * args.sigma
    try:
        patch = nlpr.PatchConfig(args.patch_size, args.search_radius, h)
        schedule = "fixed" if args.eps_schedule == "fixed" else irls.GeometricSchedule()
        icfg = irls.IrlsConfig(max_iters=args.max_iters, step_tol=args.step_tol,
                               epsilon_schedule=schedule, verify_invariants=False)
    except ValueError as exc:
        hint = " (pass --h or a positive --sigma)" if args.h is None else ""
        raise UsageError(f"{exc}{hint}") from None
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    for path in filter(None, (args.input, args.output, args.clean)):
        try:
            imageio.image_format(path)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    img = read_image(args.input)
    clean = read_image(args.clean) if args.clean else None
    noisy = nlpr.add_gaussian_noise(img, args.sigma, args.seed)

    report = {"schema": REPORT_SCHEMA, "input": args.input, "width": img.shape[1],
              "height": img.shape[0], "p": params.p, "epsilon": params.epsilon, "h": h,
              "patch_size": patch.k, "search_radius": patch.search_radius}
    if args.nlm:
        result = nlpr.nlm_denoise(noisy, patch)
        report["method"] = "nlm"
    else:
        cfg = nlpr.NlprConfig(patch, params, icfg, "nlm" if args.init == "nlm" else "noisy_patch")
        result, summary = nlpr.nlpr_denoise(noisy, cfg, workers=args.workers)
        report.update({
            "method": "nlpr",
            "iterations_mean": float(np.mean(summary.iterations)),
            "iterations_max": int(np.max(summary.iterations)),
            "terminations": summary.counts(),
            "all_monotone": bool(np.all(summary.monotone)),
        })
    write_image(args.output, result)
    if clean is not None:
        if clean.shape != img.shape:
            raise UsageError("--clean image size differs from input")
        value = nlpr.psnr(clean, to_uint8(result).astype(np.float64))
        report["psnr_vs_clean"] = value if math.isfinite(value) else "inf"
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_bench(args, out):
    params = _params(args)
    s = _instance(args)
    x0 = _x0(args, s)
    names = [n.strip() for n in args.solvers.split(",") if n.strip()]
    unknown = set(names) - {"irls", "newton", "gd"}
    if unknown or not names:
        raise UsageError(f"unknown solvers: {sorted(unknown)}")
    if args.max_iters < 1:
        raise UsageError("--max-iters must be >= 1")

    out.write("solver,iterations,final_cost,final_grad_norm,wall_time,termination\n")
    for name in names:
        start = time.perf_counter()
        if name == "irls":
            tr = irls.solve(x0, s, params, irls.IrlsConfig(max_iters=args.max_iters))
        elif name == "newton":
            cfg = baselines.BaselineConfig(
                "newton", args.max_iters,
                line_search="backtracking" if args.line_search else "none")
            tr = baselines.newton_solve(x0 if x0 is not None else irls.nlm_init(s), s, params, cfg)
        else:
            cfg = baselines.BaselineConfig("gradient_descent", args.max_iters,
                                           line_search="backtracking")
            tr = baselines.gradient_descent_solve(
                x0 if x0 is not None else irls.nlm_init(s), s, params, cfg)
        elapsed = time.perf_counter() - start
        wall = "" if args.no_timing else f"{elapsed:.6f}"
        out.write(f"{name},{tr.n_iters},{tr.final_cost!r},{tr.final_gradient_norm!r},"
                  f"{wall},{tr.termination.value}\n")
    return EXIT_OK


def cmd_trace(args, out):
    params = _params(args)
    s = _instance(args)
    x0 = _x0(args, s)
    if args.max_iters < 1:
        raise UsageError("--max-iters must be >= 1")
    try:
        cfg = irls.IrlsConfig(max_iters=args.max_iters, step_tol=args.step_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tr = irls.solve(x0, s, params, cfg)
    x_star, c_star = surrogate.reference_minimizer(s, params, x0=tr.x)

    thetas = {}
    for t, x in enumerate(tr.iterates):
        try:
            thetas[t] = surrogate.theta_t(x_star, x, s, params)
        except DegenerateDenominatorError:
            continue
    out.write("t,cost,step_norm,theta_t,log_gap\n")
    for t, c in enumerate(tr.costs):
        step = repr(tr.step_norms[t]) if t < tr.n_iters else ""
        th = repr(thetas[t]) if t in thetas else ""
        gap = c - c_star
        lg = repr(math.log(gap)) if gap > 1e-13 * abs(c_star) else ""
        out.write(f"{t},{c!r},{step},{th},{lg}\n")

    nu, pd = surrogate.nu_bound(x_star, s, params)
    out.write(f"# final_x={','.join(repr(float(v)) for v in tr.x)} "
              f"termination={tr.termination.value} iterations={tr.n_iters}\n")
    try:
        diag = surrogate.fit_linear_rate(tr, c_star)
        out.write(f"# nu_estimate={diag.nu_estimate!r} nu_bound={nu!r} "
                  f"hessian_pd={str(pd).lower()}\n")
    except InsufficientDataError:
        out.write(f"# one-step convergence: too few iterates above the noise floor to fit a rate; "
                  f"nu_bound={nu!r} hessian_pd={str(pd).lower()}\n")
    return EXIT_OK


def cmd_verify(args, out):
    results = sweep.run_checks(sweep.SWEEPS[args.sweep], seed=args.seed)
    out.write(sweep.format_table(results) + "\n")
    return EXIT_OK if sweep.all_ok(results) else EXIT_INVARIANT


COMMANDS = {"denoise": cmd_denoise, "bench-solvers": cmd_bench,
            "trace": cmd_trace, "verify": cmd_verify}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"nlpr-irls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nlpr-irls: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
