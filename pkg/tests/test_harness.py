"""Tests for pubench.harness module."""

from pathlib import Path

import numpy as np
import pytest
from pytest_mock import MockerFixture

from pubench.config import ExperimentConfig, load_experiment_config
from pubench.data import LabeledDataset, PuDataset, save_csv, synthesize_labeled
from pubench.errors import DegenerateDrawError, InvalidSpecError
from pubench.harness import (
    CheckpointRecord,
    HyperparamDraw,
    SelectedCheckpoint,
    Stream,
    TrialResult,
    aggregate,
    build_pu_data,
    decision_threshold,
    derive_seed,
    prepare_data,
    run_benchmark,
    run_sweep,
    run_trial,
    sample_hyperparams,
    select_checkpoint,
)
from pubench.model import Architecture, Classifier
from pubench.risk import EstimatorKind
from pubench.selection import Criterion


def _config(config_file: Path, **overrides: str) -> ExperimentConfig:
    return load_experiment_config(config_file, overrides)


def _record(iteration: int, pa: float, acc: float = 0.5) -> CheckpointRecord:
    return CheckpointRecord(
        iteration=iteration, threshold=0.0, criteria={"pa": pa}, metrics={"acc": acc}
    )


def _trial(algorithm: str, split: int, draw: int, value: float, acc: float) -> TrialResult:
    snapshot = Classifier.zeros(Architecture.linear(1)).snapshot()
    return TrialResult(
        algorithm=algorithm,
        master_seed=0,
        split=split,
        draw=draw,
        selected={
            "pa": SelectedCheckpoint(
                index=0, iteration=10, value=value, metrics={"acc": acc}, classifier=snapshot
            )
        },
    )


class TestSeeds:
    """Tests for derive_seed."""

    def test_same_path_same_stream(self) -> None:
        """Test that a path always yields the same numbers."""
        first = np.random.default_rng(derive_seed(7, 0, 1, Stream.INIT)).random(3)
        second = np.random.default_rng(derive_seed(7, 0, 1, Stream.INIT)).random(3)

        np.testing.assert_array_equal(first, second)

    def test_different_paths_differ(self) -> None:
        """Test that sibling streams and other masters are independent."""
        base = np.random.default_rng(derive_seed(7, 0, 1, Stream.INIT)).random()

        assert base != np.random.default_rng(derive_seed(7, 0, 1, Stream.BATCHES)).random()
        assert base != np.random.default_rng(derive_seed(7, 1, 1, Stream.INIT)).random()
        assert base != np.random.default_rng(derive_seed(8, 0, 1, Stream.INIT)).random()


class TestSampleHyperparams:
    """Tests for sample_hyperparams function."""

    def test_mlp_ranges(self) -> None:
        """Test that draws stay inside the mlp search space."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            draw = sample_hyperparams(rng, "mlp")
            assert 10**-4.5 <= draw.learning_rate <= 10**-2.5
            assert 16 <= draw.batch_size_p <= 128
            assert draw.batch_size_p == draw.batch_size_u
            assert draw.momentum == 0.9

    def test_resnet_batch_range(self) -> None:
        """Test the wider batch range of the resnet space."""
        rng = np.random.default_rng(1)
        sizes = [sample_hyperparams(rng, "resnet").batch_size_p for _ in range(200)]

        assert min(sizes) >= 32
        assert max(sizes) <= 256

    def test_default_consumes_no_randomness(self) -> None:
        """Test that the default space returns fixed values without drawing."""
        rng = np.random.default_rng(2)
        draw = sample_hyperparams(rng, "default", weight_decay=0.0, tolerance=0.1)

        assert (draw.learning_rate, draw.batch_size_p) == (0.001, 128)
        assert draw.tolerance == 0.1
        assert rng.random() == np.random.default_rng(2).random()

    def test_unknown_space(self) -> None:
        """Test that an unknown space is rejected."""
        with pytest.raises(InvalidSpecError):
            sample_hyperparams(np.random.default_rng(0), "vit")


class TestSelectCheckpoint:
    """Tests for select_checkpoint function."""

    def test_best_value(self) -> None:
        """Test that the highest criterion value wins."""
        records = [_record(10, 0.2), _record(20, 0.9), _record(30, 0.5)]

        assert select_checkpoint(records, Criterion.PA) == 1

    def test_ties_go_to_earliest(self) -> None:
        """Test that ties pick the earliest checkpoint."""
        records = [_record(10, 0.1), _record(20, 0.7), _record(30, 0.7)]

        assert select_checkpoint(records, "pa") == 1

    def test_empty(self) -> None:
        """Test that an empty list is rejected."""
        with pytest.raises(InvalidSpecError):
            select_checkpoint([], Criterion.PA)


class TestData:
    """Tests for build_pu_data and prepare_data."""

    def test_split_data_is_reproducible(self, config_file: Path) -> None:
        """Test that a split index always yields the same data."""
        config = _config(config_file)
        first, second = prepare_data(config, 0), prepare_data(config, 0)

        assert first.train == second.train
        assert first.validation == second.validation
        assert first.test == second.test
        assert prepare_data(config, 1).train != first.train

    def test_gaussian_test_set_size(self, config_file: Path) -> None:
        """Test that the test set has dataset.n_test rows."""
        pu, test = build_pu_data(_config(config_file), np.random.default_rng(0))

        assert test.n == 400
        assert pu.n_p + pu.n_u == 600

    def test_csv_dataset(
        self, config_file: Path, tmp_path: Path, rng: np.random.Generator
    ) -> None:
        """Test that a labeled CSV is split into a PU pool and a held-out test set."""
        config = _config(config_file)
        labeled = synthesize_labeled(config.mixture(), 500, rng)
        path = tmp_path / "labeled.csv"
        save_csv(labeled, path)
        csv_config = _config(
            config_file, **{"dataset.kind": "csv", "dataset.path": str(path)}
        )
        pu, test = build_pu_data(csv_config, np.random.default_rng(0))

        assert isinstance(test, LabeledDataset)
        assert test.n == 100
        assert pu.n_p + pu.n_u == 400

    def test_csv_rejects_pu_file(
        self, config_file: Path, tmp_path: Path, os_pu: PuDataset
    ) -> None:
        """Test that dataset.kind = csv needs a labeled file."""
        path = tmp_path / "pu_only.csv"
        save_csv(os_pu, path)
        config = _config(config_file, **{"dataset.kind": "csv", "dataset.path": str(path)})

        with pytest.raises(InvalidSpecError):
            build_pu_data(config, np.random.default_rng(0))


class TestDecisionThreshold:
    """Tests for decision_threshold function."""

    def test_zero_for_plain_estimators(self, os_pu: PuDataset, mlp: Classifier) -> None:
        """Test that non-PUSB algorithms threshold at zero."""
        assert decision_threshold(EstimatorKind.parse("nnpu"), mlp, os_pu) == 0.0

    def test_pusb_quantile(self, ts_pu: PuDataset, mlp: Classifier) -> None:
        """Test that PUSB predicts floor(pi n_U) unlabeled rows positive."""
        threshold = decision_threshold(EstimatorKind.parse("pusb"), mlp, ts_pu)
        positives = int(np.sum(mlp.score(ts_pu.unlabeled) >= threshold))

        assert positives == int(np.floor(0.5 * ts_pu.n_u))

    def test_calibrated_pusb_uses_replenished_pool(self, os_pu: PuDataset, mlp: Classifier) -> None:
        """Test that PUSB-c thresholds U u P."""
        threshold = decision_threshold(EstimatorKind.parse("pusb-c"), mlp, os_pu)
        pooled = np.concatenate([mlp.score(os_pu.unlabeled), mlp.score(os_pu.positives)])

        assert int(np.sum(pooled >= threshold)) == int(np.floor(0.5 * pooled.size))


class TestRunTrial:
    """Tests for run_trial function."""

    def test_checkpoint_cadence(self, config_file: Path) -> None:
        """Test one checkpoint every eval_every iterations."""
        trial = run_trial(_config(config_file), 0, 0, 0)

        assert not trial.failed
        assert [record.iteration for record in trial.checkpoints] == [20, 40, 60]
        assert set(trial.selected) == {"pa", "pauc"}
        assert set(trial.checkpoints[0].metrics) == {"acc", "auc"}

    def test_selected_matches_checkpoint(self, config_file: Path) -> None:
        """Test that the selected checkpoint carries that checkpoint's metrics."""
        trial = run_trial(_config(config_file), 1, 0, 1)
        chosen = trial.selected["pa"]

        assert chosen.metrics == trial.checkpoints[chosen.index].metrics
        assert chosen.value == max(record.criteria["pa"] for record in trial.checkpoints)
        assert chosen.stderr is None

    def test_deterministic(self, config_file: Path) -> None:
        """Test that a trial is a pure function of the config and its indices."""
        config = _config(config_file)

        assert run_trial(config, 0, 1, 1) == run_trial(config, 0, 1, 1)

    def test_hyperparams_shared_across_algorithms(self, config_file: Path) -> None:
        """Test that every algorithm gets the same draw at the same (split, draw)."""
        config = _config(config_file)

        assert run_trial(config, 0, 0, 1).hyperparams == run_trial(config, 1, 0, 1).hyperparams

    def test_oracle_mode_criterion(self, config_file: Path) -> None:
        """Test that OA is recorded in oracle mode."""
        config = _config(config_file, criteria="pa, oa", oracle_mode="true")
        trial = run_trial(config, 0, 0, 0)

        assert "oa" in trial.selected
        assert all(0.0 <= record.criteria["oa"] <= 1.0 for record in trial.checkpoints)

    def test_bootstrap_stderr(self, config_file: Path) -> None:
        """Test that bootstrap resamples give a standard error per criterion."""
        trial = run_trial(_config(config_file, bootstrap="5"), 0, 0, 0)

        assert all(choice.stderr is not None for choice in trial.selected.values())

    def test_pusb_records_threshold(self, config_file: Path) -> None:
        """Test that PUSB checkpoints carry a finite threshold."""
        trial = run_trial(_config(config_file, algo="pusb"), 0, 0, 0)

        assert all(np.isfinite(record.threshold) for record in trial.checkpoints)

    def test_degenerate_data_fails_trial(self, config_file: Path, mocker: MockerFixture) -> None:
        """Test that a degenerate draw becomes a failed trial."""
        mocker.patch(
            "pubench.harness.prepare_data", side_effect=DegenerateDrawError("n_P = 0")
        )
        trial = run_trial(_config(config_file), 0, 0, 0)

        assert trial.failed
        assert trial.failure == "n_P = 0"
        assert trial.selected == {}

    def test_divergence_fails_trial(self, config_file: Path, mocker: MockerFixture) -> None:
        """Test that a diverging run becomes a failed trial with its checkpoints so far."""
        mocker.patch(
            "pubench.harness.sample_hyperparams",
            return_value=HyperparamDraw(
                learning_rate=1e300, batch_size_p=8, batch_size_u=8, momentum=0.0
            ),
        )
        trial = run_trial(_config(config_file, loss="squared"), 0, 0, 0)

        assert trial.failed
        assert trial.failure is not None
        assert trial.selected == {}


class TestAggregate:
    """Tests for aggregate function."""

    def test_joint_selection_and_population_std(self) -> None:
        """Test the per-split winner, lowest-draw tie break and population std."""
        trials = [
            _trial("upu", 0, 0, value=0.8, acc=0.9),
            _trial("upu", 0, 1, value=0.9, acc=0.7),
            _trial("upu", 1, 0, value=0.5, acc=0.6),
            _trial("upu", 1, 1, value=0.5, acc=0.95),
        ]
        cell = aggregate(trials).cells["upu"]["pa:acc"]

        assert cell.mean == pytest.approx(0.65)
        assert cell.std == pytest.approx(0.05)
        assert cell.n_splits == 2

    def test_order_independent(self) -> None:
        """Test that trial order does not change the result."""
        trials = [
            _trial("upu", 0, 1, value=0.5, acc=0.1),
            _trial("upu", 0, 0, value=0.5, acc=0.2),
        ]

        assert aggregate(trials).cells == aggregate(trials[::-1]).cells
        assert aggregate(trials).cells["upu"]["pa:acc"].mean == pytest.approx(0.2)

    def test_failures_are_excluded_and_listed(self) -> None:
        """Test that failed trials are reported but not aggregated."""
        failed = TrialResult(algorithm="nnpu", master_seed=0, split=0, draw=0, failure="diverged")
        summary = aggregate(
            [_trial("upu", 0, 0, 0.5, 0.8), failed], ["upu", "nnpu"], ["pa"], ["acc"]
        )

        assert summary.algorithms == ["upu"]
        assert summary.failures == ["nnpu split=0 draw=0: diverged"]
        assert summary.columns == ["pa:acc"]

    def test_all_failed(self) -> None:
        """Test that an all-failed run gives an empty summary."""
        failed = TrialResult(algorithm="upu", master_seed=0, split=0, draw=0, failure="x")

        assert aggregate([failed], ["upu"], ["pa"], ["acc"]).empty


class TestRunBenchmark:
    """Tests for run_benchmark and run_sweep."""

    def test_benchmark(self, config_file: Path, clean_env: None) -> None:
        """Test the trial grid and the summary shape."""
        result = run_benchmark(_config(config_file))

        assert len(result.trials) == 2 * 2 * 2
        assert [(t.algorithm, t.split, t.draw) for t in result.trials[:3]] == [
            ("upu", 0, 0),
            ("upu", 0, 1),
            ("upu", 1, 0),
        ]
        assert result.summary.algorithms == ["upu", "upu-c"]
        assert result.summary.columns == ["pa:acc", "pa:auc", "pauc:acc", "pauc:auc"]

    def test_worker_count_does_not_change_results(self, config_file: Path, clean_env: None) -> None:
        """Test that one and two workers give identical records."""
        config = _config(config_file, draws="1")

        assert run_benchmark(config, workers=1).trials == run_benchmark(config, workers=2).trials

    def test_sweep(self, config_file: Path, clean_env: None) -> None:
        """Test that each sweep value gets a summary and tagged trials."""
        config = _config(config_file, sweep="c:0.3,0.7", splits="1", draws="1")
        result = run_sweep(config)

        assert [point.label for point in result.points] == ["0.3", "0.7"]
        assert len(result.trials) == 2 * 2
        assert {t.sweep_value for t in result.trials} == {0.3, 0.7}
        assert all(t.sweep_parameter == "c" for t in result.trials)

    def test_sweep_needs_sweep(self, config_file: Path) -> None:
        """Test that run_sweep refuses a config without a sweep."""
        with pytest.raises(InvalidSpecError):
            run_sweep(_config(config_file))
