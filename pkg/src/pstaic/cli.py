"""Command-line front end.

Exit codes: 0 on success, 1 for user errors (bad flags, missing or invalid
inputs), 2 when the solver fails. Inputs are validated before anything is
written, so a failed call leaves no partial outputs behind.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path

from . import __version__, bench
from .admm import DivergenceError
from .drivers import ALGORITHMS
from .simkit import DegradeSpec, make_psf

EXIT_OK, EXIT_USER, EXIT_SOLVER = 0, 1, 2

log = logging.getLogger("pstaic")


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for solver failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def parse_grid(text):
    """``lo:hi:n`` for a log-spaced grid, or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return bench.lambda_grid(float(lo), float(hi), int(n))
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc
    if not values or min(values) <= 0:
        raise argparse.ArgumentTypeError("grid values must be positive")
    return values


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return value

    return parse


def build_parser():
    p = _Parser(prog="pstaic", description="Joint image and weight restoration of 2D+time fluorescence data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write ground truth, measurement and sidecar per (phantom, NA)")
    s.add_argument("--manifest", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)

    r = sub.add_parser("restore", help="restore one measured volume")
    r.add_argument("--algo", choices=ALGORITHMS, default="pstaic")
    lam = r.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=_positive(float), help="absolute regularisation weight")
    lam.add_argument("--sweep", type=parse_grid, help="relative grid lo:hi:n or a,b,c; needs --truth")
    r.add_argument("--tau", type=_positive(float), default=bench.SolverParams.tau, help="barrier strength per pixel and unit lambda")
    r.add_argument("--rho", type=_positive(float), default=bench.SolverParams.rho)
    r.add_argument("--iters-outer", type=_positive(int), default=bench.SolverParams.n_outer)
    r.add_argument("--iters-inner", type=_positive(int), default=bench.SolverParams.n_inner)
    r.add_argument("--alpha-fixed", type=float, default=0.5, help="weight used by --algo staic")
    r.add_argument("--na", type=_positive(float), help="NA of the PSF when no sidecar sits next to --in")
    r.add_argument("--in", dest="inp", required=True, type=Path)
    r.add_argument("--truth", type=Path)
    r.add_argument("--out", required=True, type=Path)

    b = sub.add_parser("run", help="simulate and restore every job of a manifest")
    b.add_argument("--manifest", required=True, type=Path)
    b.add_argument("--out", required=True, type=Path)

    t = sub.add_parser("report", help="tabulate result rows")
    t.add_argument("--in", dest="inp", required=True, type=Path)
    t.add_argument("--format", choices=("csv", "md"), default="md")
    t.add_argument("--plots", type=Path, help="also write alpha/cost plots to this directory")
    return p


def _load_manifest(path):
    try:
        return bench.JobManifest.load(path)
    except (FileNotFoundError, ValueError, TypeError) as exc:
        raise UserError(str(exc)) from exc


def cmd_simulate(args):
    manifest = _load_manifest(args.manifest)
    for d in bench.simulate(manifest, args.out):
        print(d)


def cmd_run(args):
    manifest = _load_manifest(args.manifest)
    rows = bench.run_manifest(manifest, args.out)
    print(bench.format_table(rows, "md"), end="")


def cmd_restore(args):
    if not args.inp.is_file():
        raise UserError(f"input volume not found: {args.inp}")
    if args.truth is not None and not args.truth.is_file():
        raise UserError(f"truth volume not found: {args.truth}")
    if args.sweep is not None and args.truth is None:
        raise UserError("--sweep picks the best lambda by SNR and needs --truth")
    if not 0.0 < args.alpha_fixed < 1.0:
        raise UserError("--alpha-fixed must lie in (0, 1)")
    m = bench.read_volume(args.inp)
    sidecar = args.inp.parent / "dataset.json"
    phantom, na = args.inp.parent.name, math.nan
    if args.na is not None:
        h, na = make_psf(DegradeSpec(na=args.na)), args.na
    elif sidecar.is_file():
        _, ds = bench.load_dataset(args.inp)
        h, phantom, na = ds.psf(), ds.phantom_id, ds.degrade.na
    else:
        raise UserError(f"no sidecar next to {args.inp}; pass --na")
    truth = bench.read_volume(args.truth) if args.truth is not None else None
    if truth is not None and truth.shape != m.shape:
        raise UserError(f"truth shape {truth.shape} does not match input {m.shape}")
    solver = bench.SolverParams(args.tau, args.rho, args.iters_outer, args.iters_inner, args.alpha_fixed)
    if args.sweep is not None:
        lams = [x * bench.data_scale(m) for x in args.sweep]
    elif args.lam is not None:
        lams = [args.lam]
    else:
        lams = [bench.data_scale(m) * 0.1]
    reference = truth if truth is not None else m
    result = bench.sweep(m, reference, h, args.algo, lams, solver, phantom, na)
    if truth is None:
        # without ground truth the quality columns would only compare to m
        result.row = dataclasses.replace(result.row, snr_db=math.nan, ssim=math.nan, input_snr_db=math.nan)
    bench.write_result(args.out, result)
    r = result.row
    print(f"{r.algorithm}: lambda={r.best_lambda:.4g} snr={r.snr_db:.3f} dB ssim={r.ssim:.4f} alpha={r.alpha_final:.4f}")


def cmd_report(args):
    if not args.inp.exists():
        raise UserError(f"no such result directory: {args.inp}")
    try:
        rows = bench.read_rows(args.inp)
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    print(bench.format_table(rows, args.format), end="")
    if args.plots is not None:
        args.plots.mkdir(parents=True, exist_ok=True)
        for path in bench.plot_trajectories(args.inp, args.plots):
            log.info("wrote %s", path)


COMMANDS = {"simulate": cmd_simulate, "restore": cmd_restore, "run": cmd_run, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (DivergenceError, FloatingPointError, AssertionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
