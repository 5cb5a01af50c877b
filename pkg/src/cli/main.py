"""
Command dispatch: parse, load config, run the handler, write the report, map errors to exit codes.
"""
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.cli.commands import GRAPHLESS, HANDLERS
from src.cli.config import format_validation_error, load_config
from src.cli.parser import build_parser, config_overrides
from src.errors import HardcoreLabError
from src.utils.logging import PerformanceLogger, get_cli_logger, setup_logging
from src.utils.rng import resolve_seed

logger = get_cli_logger()

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2


def _fail(command: str, message: str) -> int:
    logger.error("❌ Command failed", command=command, error=message)
    print(f"hardcore-lab {command}: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; 0 on success, 1 on a failed threshold, 2 on usage or config errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.log_level or args.log_json:
        setup_logging(args.log_level, args.log_json)

    command = args.command
    try:
        config = load_config(args.config, config_overrides(args), require=() if command in GRAPHLESS else ("graph",))
        root_seed = resolve_seed(config.seed)
        with PerformanceLogger(command, logger) as perf:
            report = HANDLERS[command](config, root_seed)
    except HardcoreLabError as e:
        return _fail(command, str(e))
    except ValidationError as e:
        return _fail(command, format_validation_error(e))
    except OSError as e:
        return _fail(command, f"{e.filename or 'file'}: {e.strerror or e}")

    if report is None:
        return EXIT_OK
    report.inputs = {**report.inputs, "config": config.echo()}
    if report.wall_clock_seconds is None:
        report.wall_clock_seconds = perf.elapsed
    report.thresholds.update(config.thresholds)
    report.evaluate()

    try:
        text = report.to_json(include_timing=args.timing)
        if config.out is None:
            sys.stdout.write(text)
        else:
            report.write_json(config.out, include_timing=args.timing)
        if config.csv is not None:
            report.to_csv(config.csv)
    except OSError as e:
        return _fail(command, f"{e.filename or 'output'}: {e.strerror or e}")

    logger.info("✅ Command finished", command=command, passed=report.passed, seconds=round(perf.elapsed, 3))
    if report.passed is False:
        return EXIT_THRESHOLD
    return EXIT_OK


def main() -> None:
    sys.exit(cli_dispatch())
