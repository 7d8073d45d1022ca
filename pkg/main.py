import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional

from src.models.errors import ConfigurationError, FrameworkError, VerificationFailedError
from src.models.kinds import StrategyKind
from src.services.config import config
from src.services.download import fetch_fashion_mnist
from src.services.run_config import load_config
from src.services.runner import COMPARISON_FILE, diagnose, emit_comparison, resolve_output_root, run_experiment, sweep
from src.services.verification import run_verification

logger = logging.getLogger("Main")


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"expected a comma-separated list of integers, got '{text}'") from e


def _strategy_list(text: str) -> list[StrategyKind]:
    try:
        return [StrategyKind.parse(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"unknown strategy in '{text}'") from e


def cmd_run(args: argparse.Namespace) -> None:
    run_config = load_config(args.config)
    seeds = _int_list(args.seeds) if args.seeds else None
    experiment = run_experiment(run_config, seeds, args.output).unwrap_or_raise()
    print(experiment.model_dump_json(indent=2, exclude={"runs": {"__all__": {"detections"}}}))


def cmd_sweep(args: argparse.Namespace) -> None:
    run_config = load_config(args.config)
    experiments = sweep(
        run_config, _int_list(args.seeds), _strategy_list(args.strategies), args.workers, args.output
    ).unwrap_or_raise()
    root = resolve_output_root(run_config, args.output)
    path = root / f"{Path(COMPARISON_FILE).stem}-{experiments[0].stream_key[:12]}.csv"
    for row in emit_comparison(experiments, path):
        print(row.model_dump_json())


def cmd_diagnose(args: argparse.Namespace) -> None:
    report = diagnose(load_config(args.config), args.trials).unwrap_or_raise()
    print(report.model_dump_json(indent=2))


def cmd_verify(args: argparse.Namespace) -> None:
    report = run_verification(quick=args.quick, seed=args.seed)
    print(report.model_dump_json(indent=2))
    if not report.passed:
        raise VerificationFailedError(f"failed checks: {', '.join(report.failed)}")


def cmd_download(args: argparse.Namespace) -> None:
    paths = asyncio.run(fetch_fashion_mnist(args.root, args.url)).unwrap_or_raise()
    for path in paths:
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftcl", description="Continual learning under concept drift")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="Run one config for one or more seeds")
    run.add_argument("config", type=Path)
    run.add_argument("--seeds", help="Comma-separated seeds (default: [run] seed)")
    run.add_argument("--output", help="Output root (default: [run] output_dir or config.json)")
    run.set_defaults(handler=cmd_run)

    sweep_parser = verbs.add_parser("sweep", help="Compare strategies over several seeds")
    sweep_parser.add_argument("config", type=Path)
    sweep_parser.add_argument("--seeds", default="0,1,2")
    sweep_parser.add_argument("--strategies", default="vanilla,amr,fr")
    sweep_parser.add_argument("--workers", type=int)
    sweep_parser.add_argument("--output")
    sweep_parser.set_defaults(handler=cmd_sweep)

    diag = verbs.add_parser("diagnose", help="Gradient alignment and replacement tables")
    diag.add_argument("config", type=Path)
    diag.add_argument("--trials", type=int, default=20_000)
    diag.set_defaults(handler=cmd_diagnose)

    verify = verbs.add_parser("verify", help="Oracle self-checks")
    verify.add_argument("--quick", action="store_true")
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)

    download = verbs.add_parser("download", help="Fetch Fashion-MNIST into the dataset root")
    download.add_argument("--root")
    download.add_argument("--url")
    download.set_defaults(handler=cmd_download)
    return parser


def configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else str(config.section_value("logging", "level")).upper()
    logging.basicConfig(level=level, format="[%(name)s] %(message)s", stream=sys.stderr)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        args.handler(args)
    except FrameworkError as e:
        logger.error(e.message)
        return e.category
    return 0


if __name__ == "__main__":
    sys.exit(main())
