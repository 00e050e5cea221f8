"""Command line entry point: ``gurevich-lab run|show|selftest``."""
import argparse
import logging
import sys
from typing import List, Optional

from gurevich_lab import __version__
from gurevich_lab.cache import CountCache
from gurevich_lab.config import load_config, render_config, shipped_configs
from gurevich_lab.exceptions import (
    ComputationError,
    ConfigError,
    GurevichLabError,
    StorageError,
)
from gurevich_lab.experiments import run_experiment
from gurevich_lab.report import FORMATS, emit_report
from gurevich_lab.selftest import CHECKS, all_passed, run_selftest
from gurevich_lab.storage import StorageManager, local_container

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
EXIT_IO = 4
EXIT_SELFTEST = 1

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
REPORTS_STORAGE = "reports"


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gurevich-lab",
        description="Growth rates of group extensions of subshifts of finite type.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment and write its report")
    run.add_argument(
        "config", help=f"config file or shipped name ({', '.join(shipped_configs())})"
    )
    run.add_argument("--out", default=None, help="report directory")
    run.add_argument("--format", choices=FORMATS, default=None)
    run.add_argument("--threads", type=_positive, default=1)
    run.add_argument("--n-max", type=_positive, default=None, dest="n_max")

    show = commands.add_parser("show", help="print the canonical form of a config")
    show.add_argument("config")

    selftest = commands.add_parser("selftest", help="randomized property checks")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.add_argument("--rounds", type=_positive, default=5)
    selftest.add_argument("--only", action="append", choices=sorted(CHECKS))
    return parser


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.n_max is not None:
        config = config.with_params(n_max=args.n_max)
    report = run_experiment(config, threads=args.threads, cache=CountCache.from_env())
    StorageManager.clear()
    StorageManager.add_storage(
        REPORTS_STORAGE, local_container(args.out or config.output.directory)
    )
    stored = emit_report(
        report, args.format or config.output.format, upload_storage=REPORTS_STORAGE
    )
    for artifact in stored:
        print(artifact.name)
    return EXIT_OK


def _show(args: argparse.Namespace) -> int:
    sys.stdout.write(render_config(load_config(args.config)))
    return EXIT_OK


def _selftest(args: argparse.Namespace) -> int:
    results = run_selftest(args.seed, args.rounds, args.only)
    for result in results:
        status = "ok" if result.passed else "FAIL"
        print(f"{status:4} {result.name} {result.detail}".rstrip())
    return EXIT_OK if all_passed(results) else EXIT_SELFTEST


COMMANDS = {"run": _run, "show": _show, "selftest": _selftest}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the command and map library errors to exit codes.

    Usage errors exit with status 2 through argparse.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except StorageError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GurevichLabError as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
