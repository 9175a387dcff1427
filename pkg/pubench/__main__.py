"""CLI entry point for pubench.

Run with: python -m pubench <command>
"""

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from .checks import run_checks
from .config import load_experiment_config, load_synthesis_config, resolve_log_level
from .data import save_csv
from .errors import ConfigError
from .harness import BenchmarkSummary, build_pu_data, run_benchmark, run_sweep
from .logging_utils import (
    log_checks,
    log_config,
    log_error,
    log_header,
    log_outputs,
    log_summary,
)
from .report import TRIALS_FILE, regenerate, write_summary, write_sweep, write_trials

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_IO = 2


def run_synth(spec: Path, out: Path) -> None:
    """Write one PU dataset and one labeled test set.

    Args:
        spec: Synthesis config file.
        out: Output directory; receives ``pu.csv`` and ``test.csv``.
    """
    config = load_synthesis_config(spec)
    log_header("PU Data Synthesis", str(spec))
    log_config(config.model_dump(by_alias=True))
    pu, test = build_pu_data(config, np.random.default_rng(config.seed))
    pu_path, test_path = out / "pu.csv", out / "test.csv"
    save_csv(pu, pu_path)
    save_csv(test, test_path)
    logger.info(f"📦 n_P={pu.n_p}, n_U={pu.n_u}, test rows={test.n}")
    log_outputs([pu_path, test_path])


def run_bench(config_path: Path, out: Path | None, workers: int | None) -> None:
    """Run a benchmark (or a sweep) and write its outputs.

    Args:
        config_path: Experiment config file.
        out: Output directory overriding the config's ``out``.
        workers: Worker pool size overriding the config and environment.
    """
    config = load_experiment_config(config_path)
    if out is not None:
        config = config.with_updates(out=out)
    log_header("PU Benchmark", str(config_path))
    log_config(config.model_dump(by_alias=True))

    if config.sweep is not None:
        sweep = run_sweep(config, workers)
        written = [
            write_sweep(sweep.parameter, sweep.points, config.out),
            write_trials(sweep.trials, config.out / TRIALS_FILE),
        ]
        for point in sweep.points:
            logger.info(f"🔸 {sweep.parameter} = {point.label}")
            log_summary(point.summary.columns, _cells(point.summary))
    else:
        result = run_benchmark(config, workers)
        written = [
            write_summary(result.summary, config.out),
            write_trials(result.trials, config.out / TRIALS_FILE),
        ]
        log_summary(result.summary.columns, _cells(result.summary))
    log_outputs(written)


def _cells(summary: BenchmarkSummary) -> dict[str, dict[str, tuple[float, float]]]:
    return {
        algorithm: {column: (cell.mean, cell.std) for column, cell in row.items()}
        for algorithm, row in summary.cells.items()
    }


def run_report(trials: Path, out: Path) -> None:
    """Re-aggregate ``trials.jsonl`` into a summary or sweep table.

    Args:
        trials: Trial records file.
        out: Output directory.
    """
    log_header("PU Benchmark Report", str(trials))
    log_outputs(regenerate(trials, out))


def run_check(fast: bool, seed: int) -> bool:
    """Run the property checks.

    Returns:
        True if every check passed.
    """
    log_header("Property Checks", "fast" if fast else "full")
    results = run_checks(fast=fast, seed=seed)
    log_checks([(r.name, r.passed, r.detail) for r in results])
    return all(r.passed for r in results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pubench",
        description="Positive-unlabeled learning benchmark",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  pubench synth --spec synth.cfg --out data/       # Write pu.csv and test.csv
  pubench bench --config os.cfg                    # Run a benchmark
  pubench bench --config os.cfg --workers 4        # Run trials on 4 workers
  pubench report --trials results/trials.jsonl --out results/  # Rebuild summary.csv
  pubench check --fast                             # Quick property checks
        """,
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help="Logging level (default: PUBENCH_LOG_LEVEL or INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Synthesize a PU dataset and a test set")
    synth.add_argument("--spec", type=Path, required=True, help="Synthesis config file")
    synth.add_argument("--out", type=Path, required=True, help="Output directory")

    bench = commands.add_parser("bench", help="Run a benchmark from a config file")
    bench.add_argument("--config", type=Path, required=True, help="Experiment config file")
    bench.add_argument("--out", type=Path, default=None, help="Output directory override")
    bench.add_argument("--workers", type=int, default=None, help="Worker pool size")

    report = commands.add_parser("report", help="Rebuild the summary from trials.jsonl")
    report.add_argument("--trials", type=Path, required=True, help="trials.jsonl file")
    report.add_argument("--out", type=Path, required=True, help="Output directory")

    check = commands.add_parser("check", help="Run the property checks")
    check.add_argument("--fast", action="store_true", help="Smaller samples, quicker run")
    check.add_argument("--seed", type=int, default=0, help="Seed for the checks")
    return parser


def main(argv: Sequence[str] | None = None) -> None:
    """Main entry point with CLI argument parsing."""
    args = build_parser().parse_args(argv)

    try:
        level = resolve_log_level(args.log_level)
    except ConfigError as e:
        log_error(str(e))
        raise SystemExit(EXIT_INVALID) from e
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%H:%M:%S",
    )

    try:
        if args.command == "synth":
            run_synth(args.spec, args.out)
        elif args.command == "bench":
            run_bench(args.config, args.out, args.workers)
        elif args.command == "report":
            run_report(args.trials, args.out)
        elif not run_check(args.fast, args.seed):
            raise SystemExit(EXIT_INVALID)
    except OSError as e:
        log_error(f"{e.filename or ''}: {e.strerror or e}")
        raise SystemExit(EXIT_IO) from e
    except SystemExit:
        raise
    except Exception as e:
        log_error(str(e))
        raise SystemExit(EXIT_INVALID) from e


if __name__ == "__main__":
    main()
