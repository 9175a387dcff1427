"""Benchmark orchestration: trials, checkpoint selection, aggregation and sweeps.

One trial trains one algorithm with one hyperparameter draw on one data
split. Every ``eval_every`` iterations the trial records all validation
criteria and all test metrics; afterwards each criterion picks its best
checkpoint. The benchmark then picks, per split and criterion, the best
(draw, checkpoint) pair and reports mean and population std of the test
metrics across splits.

Seeds derive from ``(master_seed, split, draw, stream)`` only, so results
do not depend on the order in which trials run or on the worker count.
Data depend on the split alone, so every algorithm and every draw sees the
same data; hyperparameter draws and initializations depend on
``(split, draw)`` and are shared across algorithms.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field

from .config import DataConfig, ExperimentConfig, resolve_workers
from .data import (
    LabeledDataset,
    PuDataset,
    Setting,
    load_csv,
    make_os_pu,
    make_ts_pu,
    os_from_labeled,
    split_validation,
    synthesize_labeled,
    ts_from_labeled,
)
from .errors import (
    DegenerateDrawError,
    DegenerateSplitError,
    InvalidSpecError,
    NonFiniteError,
)
from .logging_utils import log_trial
from .metrics import evaluate_metrics
from .model import (
    Architecture,
    ArchitectureKind,
    Classifier,
    ClassifierSnapshot,
    OptimizerState,
    SurrogateLoss,
)
from .risk import (
    EstimatorKind,
    ObjectiveOptions,
    TrainingSchedule,
    pusb_threshold,
    replenish_batch,
    train_ts,
)
from .selection import Criterion, CriterionSuite

logger = logging.getLogger(__name__)


class Stream(IntEnum):
    """Independent random streams of one trial."""

    DATA = 0
    HYPERPARAMS = 1
    INIT = 2
    BATCHES = 3
    BOOTSTRAP = 4


def derive_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Child seed for a position in the (split, draw, stream) tree."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(path))


def _rng(master_seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *path))


# ------------------------------------------------------------------------------
# Hyperparameters


class SearchSpace(NamedTuple):
    learning_rate_exponent: tuple[float, float] | None
    batch_size_exponent: tuple[float, float] | None
    default_learning_rate: float
    default_batch_size: int
    momentum: float = 0.9


SEARCH_SPACES: dict[str, SearchSpace] = {
    "mlp": SearchSpace((-4.5, -2.5), (4.0, 7.0), 0.001, 128),
    "resnet": SearchSpace((-4.5, -2.5), (5.0, 8.0), 0.001, 64),
    "default": SearchSpace(None, None, 0.001, 128),
}


class HyperparamDraw(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(..., gt=0)
    batch_size_p: int = Field(..., ge=1)
    batch_size_u: int = Field(..., ge=1)
    momentum: float = Field(0.9, ge=0, lt=1)
    weight_decay: float = Field(1e-4, ge=0)
    tolerance: float = Field(0.0, ge=0)


def sample_hyperparams(
    rng: np.random.Generator,
    search: str = "mlp",
    weight_decay: float = 1e-4,
    tolerance: float = 0.0,
) -> HyperparamDraw:
    """Draw learning rate 10^U(a, b) and batch size round(2^U(a, b)).

    One batch size is drawn and used for both the positive and the
    unlabeled pool. The ``default`` space returns its fixed values and
    consumes no randomness.
    """
    try:
        space = SEARCH_SPACES[search]
    except KeyError as e:
        raise InvalidSpecError(f"unknown search space {search!r}; known: {sorted(SEARCH_SPACES)}") from e
    learning_rate = space.default_learning_rate
    batch_size = space.default_batch_size
    if space.learning_rate_exponent is not None:
        learning_rate = float(10 ** rng.uniform(*space.learning_rate_exponent))
    if space.batch_size_exponent is not None:
        batch_size = int(round(2 ** rng.uniform(*space.batch_size_exponent)))
    return HyperparamDraw(
        learning_rate=learning_rate,
        batch_size_p=batch_size,
        batch_size_u=batch_size,
        momentum=space.momentum,
        weight_decay=weight_decay,
        tolerance=tolerance,
    )


# ------------------------------------------------------------------------------
# Records


class CheckpointRecord(BaseModel):
    """Validation criteria and test metrics at one checkpoint."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    iteration: int
    threshold: float
    criteria: dict[str, float]
    metrics: dict[str, float]


class SelectedCheckpoint(BaseModel):
    index: int
    iteration: int
    value: float
    metrics: dict[str, float]
    stderr: float | None = None
    classifier: ClassifierSnapshot


class TrialResult(BaseModel):
    """Everything one trial produced, as written to ``trials.jsonl``."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    algorithm: str
    master_seed: int
    split: int
    draw: int
    hyperparams: HyperparamDraw | None = None
    checkpoints: list[CheckpointRecord] = Field(default_factory=list)
    selected: dict[str, SelectedCheckpoint] = Field(default_factory=dict)
    failure: str | None = None
    sweep_parameter: str | None = None
    sweep_value: float | None = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


def select_checkpoint(records: Sequence[CheckpointRecord], criterion: Criterion | str) -> int:
    """Index of the best checkpoint under ``criterion``; ties go to the earliest."""
    if not records:
        raise InvalidSpecError("cannot select from an empty checkpoint list")
    name = Criterion(criterion).value
    return int(np.argmax([record.criteria[name] for record in records]))


# ------------------------------------------------------------------------------
# Data


@dataclass(frozen=True)
class TrialData:
    train: PuDataset
    validation: PuDataset
    test: LabeledDataset


@lru_cache(maxsize=4)
def _load_labeled(path: Path) -> LabeledDataset:
    dataset = load_csv(path)
    if not isinstance(dataset, LabeledDataset):
        raise InvalidSpecError(f"{path} is a PU file; dataset.kind = csv needs a labeled file")
    return dataset


def _pu_from_pool(config: DataConfig, pool: LabeledDataset, rng: np.random.Generator) -> PuDataset:
    if config.setting is Setting.OS:
        assert config.c is not None
        return os_from_labeled(pool, config.c, config.pi, rng)
    assert config.n_p is not None and config.n_u is not None
    return ts_from_labeled(pool, config.n_p, config.n_u, config.pi, rng)


def build_pu_data(
    config: DataConfig, rng: np.random.Generator
) -> tuple[PuDataset, LabeledDataset]:
    """PU data and a labeled test set from a mixture or a labeled CSV file.

    A CSV file is shuffled; ``dataset.test_rate`` of it becomes the test set
    and the rest the pool PU data are drawn from.

    Raises:
        DegenerateDrawError: If PU synthesis leaves D_P or D_U empty.
    """
    if config.dataset_kind == "csv":
        assert config.dataset_path is not None
        labeled = _load_labeled(Path(config.dataset_path))
        order = rng.permutation(labeled.n)
        n_test = max(1, int(round(config.dataset_test_rate * labeled.n)))
        if n_test >= labeled.n:
            raise DegenerateDrawError(f"{config.dataset_path} is too small to hold out a test set")
        test = labeled.subset(order[:n_test])
        return _pu_from_pool(config, labeled.subset(order[n_test:]), rng), test
    spec = config.mixture()
    if config.setting is Setting.OS:
        assert config.n is not None and config.c is not None
        pu = make_os_pu(spec, config.n, config.c, rng)
    else:
        assert config.n_p is not None and config.n_u is not None
        pu = make_ts_pu(spec, config.n_p, config.n_u, rng)
    return pu, synthesize_labeled(spec, config.dataset_n_test, rng)


def prepare_data(config: ExperimentConfig, split: int) -> TrialData:
    """PU training and validation sets plus the labeled test set of one split.

    Raises:
        DegenerateDrawError: If PU synthesis leaves D_P or D_U empty.
        DegenerateSplitError: If the validation split leaves a part empty.
    """
    rng = _rng(config.seed, split, Stream.DATA)
    pu, test = build_pu_data(config, rng)
    halves = split_validation(pu, config.val_rate, rng)
    return TrialData(halves.train, halves.validation, test)


# ------------------------------------------------------------------------------
# Trials


def _architecture(config: ExperimentConfig, dim: int) -> Architecture:
    if config.model is ArchitectureKind.LINEAR:
        return Architecture.linear(dim)
    return Architecture.mlp(dim, config.hidden)


def decision_threshold(kind: EstimatorKind, classifier: Classifier, train: PuDataset) -> float:
    """Score cut used for predictions: 0, or the prior quantile for PUSB.

    PUSB thresholds the scores of the training unlabeled pool, replenished
    with the training positives for the calibrated variant.
    """
    if not kind.thresholds_by_prior:
        return 0.0
    pool = train.observed()
    unlabeled = pool.unlabeled
    if kind.calibrated:
        unlabeled = replenish_batch(pool.positives, unlabeled)
    return pusb_threshold(classifier.score(unlabeled), pool.prior)


def _failed(
    config: ExperimentConfig,
    kind: EstimatorKind,
    split: int,
    draw: int,
    reason: str,
    **fields: object,
) -> TrialResult:
    return TrialResult(
        algorithm=kind.token,
        master_seed=config.seed,
        split=split,
        draw=draw,
        failure=reason,
        **fields,  # type: ignore[arg-type]
    )


def run_trial(
    config: ExperimentConfig, algorithm_index: int, split: int, draw: int
) -> TrialResult:
    """Train one algorithm with one hyperparameter draw on one split.

    Degenerate data and divergent training produce a failed result instead
    of an exception.

    Args:
        config: Validated experiment config.
        algorithm_index: Position of the algorithm in ``config.algo``.
        split: Data split index.
        draw: Hyperparameter draw index.

    Returns:
        The trial record with per-checkpoint values and the selected
        checkpoint per criterion.
    """
    kind = config.estimator_kinds()[algorithm_index]
    try:
        data = prepare_data(config, split)
    except (DegenerateDrawError, DegenerateSplitError) as e:
        return _failed(config, kind, split, draw, str(e))

    hyperparams = sample_hyperparams(
        _rng(config.seed, split, draw, Stream.HYPERPARAMS),
        config.search,
        weight_decay=config.weight_decay,
        tolerance=config.tolerance,
    )
    train = data.train
    architecture = _architecture(config, train.dim)
    classifier = Classifier.initialize(architecture, _rng(config.seed, split, draw, Stream.INIT))
    optimizer = OptimizerState.create(
        architecture.parameter_count,
        hyperparams.learning_rate,
        hyperparams.momentum,
        hyperparams.weight_decay,
    )
    schedule = TrainingSchedule(
        iterations=config.iterations,
        batch_p=min(hyperparams.batch_size_p, train.n_p),
        batch_u=min(hyperparams.batch_size_u, train.n_u),
        eval_every=config.eval_every,
    )
    suite = CriterionSuite(config.criteria, train.setting, train.prior, config.oracle_mode)
    metrics = list(config.metrics)
    checkpoints: list[CheckpointRecord] = []
    snapshots: list[ClassifierSnapshot] = []

    def observe(iteration: int, current: Classifier) -> None:
        threshold = decision_threshold(kind, current, train)
        record = CheckpointRecord(
            iteration=iteration,
            threshold=threshold,
            criteria=suite.evaluate(current, data.validation, threshold),
            metrics=evaluate_metrics(
                current.score(data.test.features), data.test.labels, metrics, threshold
            ),
        )
        logger.debug("%s split=%d draw=%d %s", kind.token, split, draw, record)
        checkpoints.append(record)
        snapshots.append(current.snapshot())

    try:
        outcome = train_ts(
            kind,
            train,
            classifier,
            optimizer,
            SurrogateLoss(config.loss),
            schedule,
            _rng(config.seed, split, draw, Stream.BATCHES),
            observer=observe,
            options=ObjectiveOptions(config.tolerance, config.ascent_scale),
        )
        failure = outcome.failure
    except NonFiniteError as e:
        failure = f"non-finite scores: {e}"
    if failure is not None:
        return _failed(
            config, kind, split, draw, failure, hyperparams=hyperparams, checkpoints=checkpoints
        )

    boot_rng = _rng(config.seed, split, draw, Stream.BOOTSTRAP)
    selected: dict[str, SelectedCheckpoint] = {}
    for criterion in suite.criteria:
        index = select_checkpoint(checkpoints, criterion)
        best = checkpoints[index]
        stderr = None
        if config.bootstrap:
            stderr = suite.bootstrap_stderr(
                Classifier.from_snapshot(snapshots[index]),
                data.validation,
                config.bootstrap,
                boot_rng,
                best.threshold,
            )[criterion.value]
        selected[criterion.value] = SelectedCheckpoint(
            index=index,
            iteration=best.iteration,
            value=best.criteria[criterion.value],
            metrics=best.metrics,
            stderr=stderr,
            classifier=snapshots[index],
        )
    return TrialResult(
        algorithm=kind.token,
        master_seed=config.seed,
        split=split,
        draw=draw,
        hyperparams=hyperparams,
        checkpoints=checkpoints,
        selected=selected,
    )


# ------------------------------------------------------------------------------
# Aggregation


class SummaryCell(BaseModel):
    mean: float
    std: float
    n_splits: int


class BenchmarkSummary(BaseModel):
    """Mean and population std across splits per algorithm and criterion:metric."""

    algorithms: list[str]
    criteria: list[str]
    metrics: list[str]
    cells: dict[str, dict[str, SummaryCell]] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.cells

    @property
    def columns(self) -> list[str]:
        return [f"{criterion}:{metric}" for criterion in self.criteria for metric in self.metrics]


def _unique(values: list[str]) -> list[str]:
    return list(dict.fromkeys(values))


def aggregate(
    trials: Sequence[TrialResult],
    algorithms: Sequence[str] | None = None,
    criteria: Sequence[str] | None = None,
    metrics: Sequence[str] | None = None,
) -> BenchmarkSummary:
    """Per-split joint (draw, checkpoint) selection, then mean/std over splits.

    Within a split the draw whose selected checkpoint has the highest
    criterion value wins; ties go to the lowest draw index. Names not given
    are taken from the trials in order of first appearance.
    """
    ok = [trial for trial in trials if not trial.failed]
    algorithms = _unique(list(algorithms or [trial.algorithm for trial in trials]))
    if criteria is None:
        criteria = _unique([name for trial in ok for name in trial.selected])
    if metrics is None:
        metrics = _unique(
            [name for trial in ok for best in trial.selected.values() for name in best.metrics]
        )
    failures = [
        f"{trial.algorithm} split={trial.split} draw={trial.draw}: {trial.failure}"
        for trial in trials
        if trial.failed
    ]

    cells: dict[str, dict[str, SummaryCell]] = {}
    for algorithm in algorithms:
        by_split: dict[int, list[TrialResult]] = {}
        for trial in ok:
            if trial.algorithm == algorithm:
                by_split.setdefault(trial.split, []).append(trial)
        if not by_split:
            continue
        row: dict[str, SummaryCell] = {}
        for criterion in criteria:
            winners: list[SelectedCheckpoint] = []
            for split in sorted(by_split):
                candidates = sorted(by_split[split], key=lambda t: t.draw)
                best: SelectedCheckpoint | None = None
                for trial in candidates:
                    choice = trial.selected[criterion]
                    if best is None or choice.value > best.value:
                        best = choice
                assert best is not None
                winners.append(best)
            for metric in metrics:
                values = np.array([winner.metrics[metric] for winner in winners])
                row[f"{criterion}:{metric}"] = SummaryCell(
                    mean=float(np.mean(values)),
                    std=float(np.std(values)),
                    n_splits=len(winners),
                )
        cells[algorithm] = row
    return BenchmarkSummary(
        algorithms=[a for a in algorithms if a in cells],
        criteria=list(criteria),
        metrics=list(metrics),
        cells=cells,
        failures=failures,
    )


@dataclass(frozen=True)
class BenchmarkResult:
    summary: BenchmarkSummary
    trials: list[TrialResult]


def run_benchmark(config: ExperimentConfig, workers: int | None = None) -> BenchmarkResult:
    """Run every (algorithm, split, draw) trial and aggregate.

    Args:
        config: Validated experiment config.
        workers: Worker pool size; falls back to ``config.workers``, then to
            ``PUBENCH_WORKERS``, then to 1.

    Returns:
        The summary and all trial records in (algorithm, split, draw) order.
    """
    n_jobs = resolve_workers(workers if workers is not None else config.workers)
    tasks = [
        (algorithm, split, draw)
        for algorithm in range(len(config.algo))
        for split in range(config.splits)
        for draw in range(config.draws)
    ]
    logger.info("Running %d trials on %d worker(s)", len(tasks), n_jobs)
    trials: list[TrialResult] = Parallel(n_jobs=n_jobs)(
        delayed(run_trial)(config, algorithm, split, draw) for algorithm, split, draw in tasks
    )
    for trial in trials:
        best = {name: choice.value for name, choice in trial.selected.items()}
        log_trial(trial.algorithm, trial.split, trial.draw, trial.failure, best)

    summary = aggregate(
        trials,
        [kind.token for kind in config.estimator_kinds()],
        [c.value for c in config.criteria],
        [m.value for m in config.metrics],
    )
    if summary.empty:
        logger.warning("All %d trials failed; the summary is empty", len(trials))
    return BenchmarkResult(summary, trials)


@dataclass(frozen=True)
class SweepPoint:
    label: str
    value: float
    summary: BenchmarkSummary


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    points: list[SweepPoint]
    trials: list[TrialResult]


def run_sweep(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Run the benchmark once per value of ``config.sweep``."""
    if config.sweep is None:
        raise InvalidSpecError("config has no sweep")
    points: list[SweepPoint] = []
    trials: list[TrialResult] = []
    for label, value in zip(config.sweep.labels(), config.sweep.values, strict=True):
        logger.info("Sweep %s = %s", config.sweep.parameter, label)
        result = run_benchmark(config.for_sweep_value(value), workers)
        points.append(SweepPoint(label, value, result.summary))
        trials.extend(
            trial.model_copy(
                update={"sweep_parameter": config.sweep.parameter, "sweep_value": value}
            )
            for trial in result.trials
        )
    return SweepResult(config.sweep.parameter, points, trials)
