"""Command-line entry point: ``perturbed-lattice`` (or ``python -m perturbed_lattice``)."""

from __future__ import annotations

import argparse
import sys

from . import experiments, realspace, spectral
from .errors import QuadratureError, ToleranceUnreachableError
from .montecarlo import run_mc
from .point_process import PERTURBED, STATIONARIZED, ProcessConfig
from .test_functions import get_test_function

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="perturbed-lattice",
                description="Mean and variance of linear statistics of Gaussian-perturbed lattices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list registered experiments")

    run = sub.add_parser("run", help="run a registered experiment")
    run.add_argument("name")
    run.add_argument("--d", type=int)
    run.add_argument("--a", type=float)
    run.add_argument("--grid", type=_grid)
    run.add_argument("--eps", type=float)
    run.add_argument("--replicates", type=int)
    run.add_argument("--seed", type=_u64)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"), default="csv")

    for name, text in (("mean", "exact mean"), ("variance", "exact variance"),
                       ("mc", "Monte Carlo estimate")):
        c = sub.add_parser(name, help=text)
        c.add_argument("--shape", required=True, help="zero | cube | ball:r=R | gauss:pi | sobolev-g:eps=E")
        c.add_argument("--d", type=int, required=True)
        c.add_argument("--a", type=float, required=True)
        c.add_argument("--R", type=float, required=True)
        c.add_argument("--stationary", action="store_true")
        c.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "variance":
            c.add_argument("--method", choices=("fourier", "realspace"), default="fourier")
        if name == "mc":
            c.add_argument("--replicates", type=int, default=10_000)
            c.add_argument("--seed", type=_u64, default=0)
            c.add_argument("--workers", type=int, default=1)
    return p


def _calculator(args):
    h = get_test_function(args.shape, args.d)
    kind = STATIONARIZED if args.stationary else PERTURBED
    label = args.command
    if args.command == "mean":
        if args.stationary:
            return [experiments.ResultRow(label, args.R, "mean_s", "fourier",
                                          spectral.mean_stationary(h, args.R))]
        res = spectral.mean_exact(h, args.R, args.a)
        return [experiments.ResultRow(label, args.R, "mean", "fourier", res.value, None,
                                      res.truncation_bound)]
    if args.command == "variance":
        if args.method == "realspace":
            fn = realspace.variance_stationary_realspace if args.stationary else realspace.variance_realspace
            return [experiments.ResultRow(label, args.R, "var_s" if args.stationary else "var",
                                          "realspace", fn(h, args.R, args.a))]
        fn = spectral.variance_stationary if args.stationary else spectral.variance_exact
        res = fn(h, args.R, args.a)
        return [experiments.ResultRow(label, args.R, "var_s" if args.stationary else "var",
                                      "fourier", res.value, None,
                                      res.truncation_bound + res.quad_error)]
    cfg = ProcessConfig(args.d, args.a, args.R, kind, args.seed)
    est = run_mc(cfg, h, args.replicates, workers=args.workers)
    return [experiments.ResultRow(label, args.R, "mean", "mc", est.mean, None, est.se_mean, args.seed),
            experiments.ResultRow(label, args.R, "var", "mc", est.variance, None, est.se_variance,
                                  args.seed)]


def _emit(rows, fmt, out=None):
    text = experiments.rows_to_csv(rows) if fmt == "csv" else experiments.rows_to_json(rows) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            for name, desc, anchor in experiments.list_experiments():
                print(f"{name}\t{desc}\t[{anchor}]")
            return EXIT_OK
        if args.command == "run":
            overrides = {k: getattr(args, k) for k in ("d", "a", "grid", "eps", "replicates", "seed")}
            cfg = experiments.ExperimentConfig(args.name, overrides, args.out, args.format)
            _emit(experiments.run_experiment(cfg), args.format, args.out)
            return EXIT_OK
        _emit(_calculator(args), args.format)
        return EXIT_OK
    except (QuadratureError, ToleranceUnreachableError) as exc:
        print(f"error: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KeyError, ValueError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
