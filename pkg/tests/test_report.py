"""Tests for pubench.report module."""

import logging
import math
from pathlib import Path

import pandas as pd
import pytest

from pubench.config import load_experiment_config
from pubench.errors import InvalidSpecError
from pubench.harness import (
    BenchmarkSummary,
    CheckpointRecord,
    TrialResult,
    aggregate,
    run_benchmark,
    run_sweep,
)
from pubench.report import (
    SUMMARY_FILE,
    SWEEP_COLUMNS,
    TRIALS_FILE,
    format_cell,
    load_trials,
    regenerate,
    write_summary,
    write_sweep,
    write_trials,
)


class TestFormatCell:
    """Tests for format_cell function."""

    def test_round_trip_form(self) -> None:
        """Test that both numbers use the shortest round-trip form."""
        assert format_cell(0.1, 0.0) == "0.1±0.0"
        mean, std = format_cell(2 / 3, 1 / 7).split("±")
        assert float(mean) == 2 / 3
        assert float(std) == 1 / 7


class TestWriteSummary:
    """Tests for write_summary function."""

    def test_empty_summary_is_header_only(
        self, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Test that an empty summary writes only the header and warns."""
        caplog.set_level(logging.WARNING)
        summary = BenchmarkSummary(
            algorithms=[], criteria=["pa"], metrics=["acc"], failures=["upu split=0 draw=0: x"]
        )
        path = write_summary(summary, tmp_path)

        assert path.read_text(encoding="utf-8") == "algorithm,pa:acc\n"
        assert "empty" in caplog.text


class TestTrialsFile:
    """Tests for write_trials and load_trials."""

    def test_infinite_threshold_survives(self, tmp_path: Path) -> None:
        """Test that an infinite PUSB threshold is written and read back."""
        trial = TrialResult(
            algorithm="pusb",
            master_seed=0,
            split=0,
            draw=0,
            checkpoints=[
                CheckpointRecord(
                    iteration=10, threshold=math.inf, criteria={"pa": 1.0}, metrics={"acc": 0.5}
                )
            ],
            failure="stopped",
        )
        path = write_trials([trial], tmp_path / TRIALS_FILE)

        assert load_trials(path) == [trial]

    def test_bad_line_reports_number(self, tmp_path: Path) -> None:
        """Test that a malformed record names its line."""
        path = tmp_path / TRIALS_FILE
        path.write_text('{"algorithm": "upu"}\n', encoding="utf-8")

        with pytest.raises(InvalidSpecError, match="line 1"):
            load_trials(path)


class TestRegenerate:
    """Tests for regenerate on real benchmark output."""

    def test_summary_is_byte_identical(
        self, config_file: Path, tmp_path: Path, clean_env: None
    ) -> None:
        """Test that the summary rebuilt from trials.jsonl matches the original bytes."""
        config = load_experiment_config(config_file)
        result = run_benchmark(config)
        original = write_summary(result.summary, tmp_path / "first")
        trials = write_trials(result.trials, tmp_path / "first" / TRIALS_FILE)

        [rebuilt] = regenerate(trials, tmp_path / "second")

        assert rebuilt.name == SUMMARY_FILE
        assert rebuilt.read_bytes() == original.read_bytes()
        assert aggregate(load_trials(trials)) == result.summary

    def test_summary_layout(self, config_file: Path, tmp_path: Path, clean_env: None) -> None:
        """Test one row per algorithm and mean±std cells."""
        result = run_benchmark(load_experiment_config(config_file))
        frame = pd.read_csv(write_summary(result.summary, tmp_path), dtype=str)

        assert list(frame.columns) == ["algorithm", "pa:acc", "pa:auc", "pauc:acc", "pauc:auc"]
        assert list(frame["algorithm"]) == ["upu", "upu-c"]
        assert all("±" in cell for cell in frame["pa:acc"])

    def test_sweep_table(self, config_file: Path, tmp_path: Path, clean_env: None) -> None:
        """Test that swept trials regenerate the sweep table."""
        config = load_experiment_config(
            config_file, {"sweep": "c:0.3,0.7", "splits": "1", "draws": "1"}
        )
        sweep = run_sweep(config)
        original = write_sweep(sweep.parameter, sweep.points, tmp_path / "first")
        trials = write_trials(sweep.trials, tmp_path / "first" / TRIALS_FILE)

        [rebuilt] = regenerate(trials, tmp_path / "second")
        frame = pd.read_csv(rebuilt, dtype=str)

        assert rebuilt.name == "sweep_c.csv"
        assert rebuilt.read_bytes() == original.read_bytes()
        assert list(frame.columns) == SWEEP_COLUMNS
        assert set(frame["value"]) == {"0.3", "0.7"}
