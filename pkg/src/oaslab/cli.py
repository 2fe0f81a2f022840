"""Command line entry point: ``oaslab run | plot | verify``."""

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .model import ModelParams


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="oaslab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment and write a CSV")
    run.add_argument("--preset", choices=sorted(harness.PRESETS))
    run.add_argument("--scheme", choices=harness.SCHEMES)
    run.add_argument("--B", type=_positive_int, default=100)
    run.add_argument("--L", type=_positive_int, nargs="+", default=[4],
                     help="block length; several values make a block-length sweep at fixed N and K")
    run.add_argument("--N", type=_positive_int, help="signal length for a block-length sweep")
    run.add_argument("--xi", type=float, default=0.1)
    run.add_argument("--M", type=_positive_int, default=8)
    group = run.add_mutually_exclusive_group()
    group.add_argument("--rc", type=float, nargs="+", help="compression rates N/K")
    group.add_argument("--K", type=_positive_int, nargs="+", help="number of sensors")
    run.add_argument("--sigma0-sq", type=float, default=0.01)
    run.add_argument("--T", type=float, default=1.0)
    run.add_argument("--trials", type=_positive_int)
    run.add_argument("--seed", type=int)
    run.add_argument("--metric", choices=("paper", "exact"),
                     help="posterior information driving adaptation (default: exact)")
    run.add_argument("--principles", choices=("identity", "random-orthogonal"))
    run.add_argument("--tune-trials", type=_positive_int,
                     help="trials used for the group LASSO lambda search (default 100)")
    run.add_argument("--workers", type=_positive_int,
                     help="worker processes (default: $OASLAB_THREADS or 1)")
    run.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    run.add_argument("--no-plot", action="store_true", help="skip the SVG written next to --out")
    run.add_argument("--wall-time", action="store_true",
                     help="fill the wall_s column (makes the CSV run-dependent)")

    plot = sub.add_parser("plot", help="render result CSVs as an SVG chart")
    plot.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    plot.add_argument("--out", type=Path, required=True)
    plot.add_argument("--title")

    verify = sub.add_parser("verify", help="run the oracle agreement suite")
    verify.add_argument("--points", type=_positive_int, default=1000)
    verify.add_argument("--instances", type=_positive_int, default=50)
    return parser


def specs_from_args(args):
    common = dict(trials=args.trials, seed=args.seed, metric=args.metric,
                  principle_kind=args.principles, tune_trials=args.tune_trials)
    if args.preset:
        return harness.with_overrides(harness.PRESETS[args.preset](), **common)
    if not args.scheme:
        raise harness.SpecError("either --preset or --scheme is required")
    fields = dict(xi=args.xi, sigma0_sq=args.sigma0_sq, T=args.T, M=args.M)
    if len(args.L) > 1:
        if not args.K or len(args.K) != 1 or not args.N:
            raise harness.SpecError("a block-length sweep needs --N and exactly one --K")
        model = ModelParams(B=args.N, L=1, **fields)
        spec = harness.ExperimentSpec(args.scheme, model, "L", tuple(args.L), K=args.K[0])
    else:
        model = ModelParams(B=args.B, L=args.L[0], **fields)
        if args.K:
            spec = harness.ExperimentSpec(args.scheme, model, "K", tuple(args.K))
        else:
            spec = harness.ExperimentSpec(args.scheme, model, "rc", tuple(args.rc or [1.0]))
    return harness.with_overrides([spec], **common)


def cmd_run(args):
    table = harness.run_all(specs_from_args(args), workers=args.workers)
    if args.out is None:
        sys.stdout.write(harness.format_csv(table, args.wall_time))
        return 0
    harness.emit_csv(table, args.out, args.wall_time)
    if not args.no_plot and table.rows:
        from .plotting import emit_svg

        emit_svg(table, args.out.with_suffix(".svg"))
    return 0


def cmd_plot(args):
    from .plotting import emit_svg

    tables = [harness.read_csv(p) for p in args.inputs]
    emit_svg(tables, args.out, title=args.title)
    return 0


def cmd_verify(args):
    from .verify import run_suite

    checks = run_suite(points=args.points, instances=args.instances)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "plot": cmd_plot, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"oaslab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
