"""Command-line entry point.

Exit codes: 0 on success, 1 on a usage or configuration error, 2 when a
solver or numerical check fails.
"""
import argparse
import sys

from ..errors import ConfigError, EntropicOTError
from .config import OracleRow, ExperimentConfig, format_rows
from .runners import ORACLE_LAMBDAS, ROW_TYPES, run, run_verify_oracle

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

COMMANDS = {
    "cost-curve": "cost_curve",
    "coupling-contour": "coupling_contour",
    "mds-embed": "mds_embed",
    "cov-benchmark": "cov_benchmark",
    "barycenter-benchmark": "barycenter_benchmark",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for solver failures here.
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(tok) for tok in text.split(",") if tok.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a comma-separated list of {kind.__name__}: {text!r}") from None

    return parse


def _u64(text):
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser():
    parser = _Parser(prog="entropic-gaussians", description="Entropic OT between Gaussians: figures, tables and checks.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--lambda", dest="lambdas", type=_csv_list(float), help="comma-separated lambdas")

    bench = _Parser(add_help=False)
    bench.add_argument("--seed", type=_u64)
    bench.add_argument("--dims", type=_csv_list(int))
    bench.add_argument("--sample-sizes", dest="sample_sizes", type=_csv_list(int))
    bench.add_argument("--reps", dest="replications", type=int)

    for name in COMMANDS:
        sub.add_parser(name, parents=[common, bench], help=f"run the {name} experiment")
    sub.add_parser("verify-oracle", parents=[common], help="check closed forms against grid Sinkhorn")
    return parser


def _config_for(args):
    experiment = COMMANDS[args.command]
    data = {}
    if args.config:
        try:
            cfg = ExperimentConfig.from_json(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if cfg.experiment != experiment:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {experiment!r}")
        data = {k: getattr(cfg, k) for k in ("seed", "replications", "dims", "sample_sizes", "lambdas", "output_path", "sigma_true", "m", "grid_points")}
    for key in ("seed", "replications", "dims", "sample_sizes", "lambdas"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.out:
        data["output_path"] = args.out
    return ExperimentConfig(experiment=experiment, **data)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or "csv"
    try:
        if args.command == "verify-oracle":
            rows = run_verify_oracle(lambdas=args.lambdas or ORACLE_LAMBDAS)
            _emit(format_rows(rows, fmt, OracleRow), args.out)
            failed = [r for r in rows if not r.passed]
            if failed:
                print(f"{len(failed)} of {len(rows)} oracle checks failed", file=sys.stderr)
                return EXIT_NUMERICAL
            return EXIT_OK
        config = _config_for(args)
        rows = run(config)
        _emit(format_rows(rows, fmt, ROW_TYPES[config.experiment]), config.output_path or None)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EntropicOTError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
