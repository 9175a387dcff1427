"""Benchmark outputs: ``summary.csv``, ``trials.jsonl`` and ``sweep_<name>.csv``.

Summary cells are ``mean±std`` with both numbers in shortest round-trip
float form, so a summary regenerated from ``trials.jsonl`` is byte-identical
to the one written by the benchmark.
"""

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from .errors import InvalidSpecError
from .harness import BenchmarkSummary, SweepPoint, TrialResult, aggregate

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.csv"
TRIALS_FILE = "trials.jsonl"
SWEEP_COLUMNS = ["value", "algorithm", "criterion", "metric", "mean", "std"]


def format_cell(mean: float, std: float) -> str:
    return f"{mean!r}±{std!r}"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


def write_summary(summary: BenchmarkSummary, out_dir: str | Path) -> Path:
    """Write ``summary.csv``: one row per algorithm, one column per criterion:metric.

    An empty summary produces a header-only file and a warning.
    """
    columns = ["algorithm", *summary.columns]
    rows = [
        [algorithm]
        + [
            format_cell(cell.mean, cell.std)
            for cell in (summary.cells[algorithm][column] for column in summary.columns)
        ]
        for algorithm in summary.algorithms
    ]
    if summary.empty:
        logger.warning("Summary is empty; writing a header-only %s", SUMMARY_FILE)
        for reason in summary.failures:
            logger.warning("  %s", reason)
    return _write_frame(pd.DataFrame(rows, columns=columns), Path(out_dir) / SUMMARY_FILE)


def write_trials(trials: Iterable[TrialResult], path: str | Path) -> Path:
    """One JSON object per line, UTF-8."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for trial in trials:
            handle.write(trial.model_dump_json() + "\n")
    return path


def load_trials(path: str | Path) -> list[TrialResult]:
    """Read ``trials.jsonl``.

    Raises:
        InvalidSpecError: If a line is not a valid trial record.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    trials: list[TrialResult] = []
    with path.open(encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                trials.append(TrialResult.model_validate_json(line))
            except ValidationError as e:
                raise InvalidSpecError(f"{path}, line {number}: {e}") from e
    return trials


def write_sweep(parameter: str, points: Sequence[SweepPoint], out_dir: str | Path) -> Path:
    """Long-format sweep table: value, algorithm, criterion, metric, mean, std."""
    rows = [
        [point.label, algorithm, criterion, metric, repr(cell.mean), repr(cell.std)]
        for point in points
        for algorithm in point.summary.algorithms
        for criterion in point.summary.criteria
        for metric in point.summary.metrics
        for cell in [point.summary.cells[algorithm][f"{criterion}:{metric}"]]
    ]
    path = Path(out_dir) / f"sweep_{parameter}.csv"
    return _write_frame(pd.DataFrame(rows, columns=SWEEP_COLUMNS), path)


def _sweep_label(parameter: str, value: float) -> str:
    return str(int(value)) if parameter == "n_p" else repr(value)


def regenerate(trials_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Rebuild the summary (or sweep table) from ``trials.jsonl``.

    Returns:
        Paths written.
    """
    trials = load_trials(trials_path)
    swept = [trial for trial in trials if trial.sweep_parameter is not None]
    if not swept:
        return [write_summary(aggregate(trials), out_dir)]

    parameter = swept[0].sweep_parameter
    assert parameter is not None
    values = list(dict.fromkeys(trial.sweep_value for trial in swept))
    points = []
    for value in values:
        assert value is not None
        group = [trial for trial in swept if trial.sweep_value == value]
        points.append(SweepPoint(_sweep_label(parameter, value), value, aggregate(group)))
    return [write_sweep(parameter, points, out_dir)]
