"""Positive-unlabeled learning library and benchmark harness.

Risk estimators for PU learning under the one-sample (OS) and two-sample
(TS) data-generation assumptions, the replenishment wrapper that makes TS
estimators unbiased under OS, model-selection criteria computable without
negative labels, and a reproducible benchmark harness.

Example usage:
    import numpy as np
    from pubench import (
        Architecture, Classifier, EstimatorKind, GaussianMixtureSpec, LossKind,
        OptimizerState, SurrogateLoss, TrainingSchedule, make_os_pu, train_ts,
    )

    rng = np.random.default_rng(0)
    spec = GaussianMixtureSpec.symmetric(dim=2, separation=1.4, prior=0.5)
    pu = make_os_pu(spec, n=4000, c=0.4, rng=rng)
    arch = Architecture.linear(2)
    outcome = train_ts(
        EstimatorKind.parse("upu-c"),
        pu,
        Classifier.initialize(arch, rng),
        OptimizerState.create(arch.parameter_count, learning_rate=0.01),
        SurrogateLoss(LossKind.SIGMOID),
        TrainingSchedule(iterations=1000, batch_p=64, batch_u=64, eval_every=100),
        rng,
    )
"""

from .checks import CheckResult, run_checks
from .config import (
    ExperimentConfig,
    Sweep,
    SynthesisConfig,
    load_experiment_config,
    load_synthesis_config,
    read_key_values,
)
from .data import (
    GaussianMixtureSpec,
    LabeledDataset,
    LabelFrequencyEstimate,
    PuDataset,
    PuSplit,
    Setting,
    estimate_label_frequency,
    label_frequency_ratio,
    load_csv,
    make_os_pu,
    make_ts_pu,
    os_from_labeled,
    os_prior,
    save_csv,
    split_validation,
    synthesize_labeled,
    ts_from_labeled,
)
from .errors import (
    ConfigError,
    CsvFormatError,
    DegenerateDrawError,
    DegenerateSplitError,
    DimensionMismatchError,
    InvalidSpecError,
    MissingOracleError,
    NonFiniteError,
    PuBenchError,
)
from .harness import (
    BenchmarkResult,
    BenchmarkSummary,
    CheckpointRecord,
    HyperparamDraw,
    TrialResult,
    aggregate,
    derive_seed,
    run_benchmark,
    run_sweep,
    run_trial,
    sample_hyperparams,
    select_checkpoint,
)
from .logging_utils import log_checks, log_error, log_header, log_summary
from .metrics import (
    ConfusionCounts,
    Metric,
    MetricValue,
    accuracy,
    auc,
    confusion,
    evaluate_metrics,
    f1,
    pairwise_auc,
    precision,
    recall,
)
from .model import (
    Architecture,
    ArchitectureKind,
    Classifier,
    ClassifierSnapshot,
    LossKind,
    OptimizerState,
    SurrogateLoss,
    finite_diff_check,
    score_batch,
    sgd_step,
    weighted_loss_and_grad,
)
from .report import load_trials, regenerate, write_summary, write_sweep, write_trials
from .risk import (
    EstimatorKind,
    RiskBatch,
    RiskValue,
    TrainingSchedule,
    calibrated_risk,
    expected_bias_oracle,
    monte_carlo_risk,
    nnpu_ga_step,
    nnpu_risk,
    pusb_threshold,
    register_objective,
    replenish_batch,
    train_ts,
    upu_risk,
)
from .selection import (
    Criterion,
    CriterionSuite,
    oracle_accuracy,
    pa_to_acc,
    pauc_to_auc,
    proxy_accuracy,
    proxy_auc,
)

__all__ = [
    # Data
    "GaussianMixtureSpec",
    "LabeledDataset",
    "LabelFrequencyEstimate",
    "PuDataset",
    "PuSplit",
    "Setting",
    "estimate_label_frequency",
    "label_frequency_ratio",
    "load_csv",
    "make_os_pu",
    "make_ts_pu",
    "os_from_labeled",
    "os_prior",
    "save_csv",
    "split_validation",
    "synthesize_labeled",
    "ts_from_labeled",
    # Model
    "Architecture",
    "ArchitectureKind",
    "Classifier",
    "ClassifierSnapshot",
    "LossKind",
    "OptimizerState",
    "SurrogateLoss",
    "finite_diff_check",
    "score_batch",
    "sgd_step",
    "weighted_loss_and_grad",
    # Risk estimators and training
    "EstimatorKind",
    "RiskBatch",
    "RiskValue",
    "TrainingSchedule",
    "calibrated_risk",
    "expected_bias_oracle",
    "monte_carlo_risk",
    "nnpu_ga_step",
    "nnpu_risk",
    "pusb_threshold",
    "register_objective",
    "replenish_batch",
    "train_ts",
    "upu_risk",
    # Model selection
    "Criterion",
    "CriterionSuite",
    "oracle_accuracy",
    "pa_to_acc",
    "pauc_to_auc",
    "proxy_accuracy",
    "proxy_auc",
    # Metrics
    "ConfusionCounts",
    "Metric",
    "MetricValue",
    "accuracy",
    "auc",
    "confusion",
    "evaluate_metrics",
    "f1",
    "pairwise_auc",
    "precision",
    "recall",
    # Harness
    "BenchmarkResult",
    "BenchmarkSummary",
    "CheckpointRecord",
    "ExperimentConfig",
    "HyperparamDraw",
    "Sweep",
    "SynthesisConfig",
    "TrialResult",
    "aggregate",
    "derive_seed",
    "load_experiment_config",
    "load_synthesis_config",
    "read_key_values",
    "run_benchmark",
    "run_sweep",
    "run_trial",
    "sample_hyperparams",
    "select_checkpoint",
    # Reports and checks
    "CheckResult",
    "load_trials",
    "regenerate",
    "run_checks",
    "write_summary",
    "write_sweep",
    "write_trials",
    # Logging utilities
    "log_checks",
    "log_error",
    "log_header",
    "log_summary",
    # Errors
    "ConfigError",
    "CsvFormatError",
    "DegenerateDrawError",
    "DegenerateSplitError",
    "DimensionMismatchError",
    "InvalidSpecError",
    "MissingOracleError",
    "NonFiniteError",
    "PuBenchError",
]
