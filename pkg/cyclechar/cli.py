"""
Command line front end.

    cyclechar run cyclechar/scenarios/fredholm_rank_one.json --out report.json
    cyclechar selftest --quick

Exit status: 0 when every task passes, 1 on a failed or errored task, 2 on an
unreadable scenario.
"""

import argparse
import sys
from typing import Optional, Sequence

from .errors import ScenarioError
from .logger import logger, setup_logger
from .progress import ProgressPrinter
from .runner import Report, run, set_default
from .selftest import selftest
from .storage import write_report


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the JSON report to this path")
    parser.add_argument("--log-level", default="WARNING", help="console/file log level (default WARNING)")
    parser.add_argument("--log-file", help="also log to this file")
    parser.add_argument("--no-progress", action="store_true", help="disable the stderr progress lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclechar", description="Chern characters of generalized chains")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario file")
    p.add_argument("scenario", help="path to a scenario JSON file")
    p.add_argument("--kernel", choices=["exact", "float"])
    p.add_argument("--tol", type=float, help="tolerance for floating identities")
    p.add_argument("--pairing-tol", type=float, help="tolerance for quadrature and pairing checks")
    p.add_argument("--budget", type=int, help="exhaustive evaluation budget in basis tuples")
    p.add_argument("--samples", type=int, help="sample count when over budget")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    _common(p)

    s = sub.add_parser("selftest", help="run the bundled acceptance suite")
    s.add_argument("--quick", action="store_true", help="smaller random sweeps, skip the slow scenarios")
    s.add_argument("--corrupt-sign", action="store_true", help="negate B (the suite must then fail)")
    s.add_argument("--exact", action="store_true", help="force the exact kernel where supported")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int)
    _common(s)
    return parser


def _emit(report: Report, out: Optional[str], progress: ProgressPrinter) -> int:
    progress.finish()
    sys.stdout.write(report.render_text())
    write_report(out, report.to_dict())
    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(filepath=args.log_file, level=args.log_level)
    progress = ProgressPrinter(enabled=not args.no_progress)
    logger.debug("cli: command=%s", args.command)

    if args.command == "selftest":
        if args.threads is not None:
            set_default(threads=args.threads)
        report = selftest(quick=args.quick, corrupt_sign=args.corrupt_sign, exact=args.exact, seed=args.seed,
                          progress=progress)
        return _emit(report, args.out, progress)

    try:
        report = run(args.scenario, kernel=args.kernel, tol=args.tol, pairing_tol=args.pairing_tol,
                     budget=args.budget, samples=args.samples, threads=args.threads, seed=args.seed,
                     progress=progress)
    except ScenarioError as e:
        sys.stderr.write(f"cyclechar: invalid scenario {args.scenario}: {e}\n")
        return 2
    return _emit(report, args.out, progress)


if __name__ == "__main__":
    sys.exit(main())
