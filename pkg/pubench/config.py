"""Experiment and synthesis configuration.

Config files are line-oriented ``key = value`` text in dotenv syntax. ``#`` at the start
of a line or after whitespace starts a comment, blank lines are ignored, and
list values are comma separated::

    seed = 7
    setting = OS
    pi = 0.5
    c = 0.4
    n = 4000
    algo = upu, upu-c, nnpu
    criteria = pa, pauc

Environment variables fill in what neither the file nor the command line
sets: ``PUBENCH_WORKERS`` (worker pool size) and ``PUBENCH_LOG_LEVEL``.
"""

import logging
import os
from pathlib import Path
from typing import Any, Literal

from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .data import GaussianMixtureSpec, Setting
from .errors import ConfigError, InvalidSpecError
from .metrics import Metric
from .model import ArchitectureKind, LossKind
from .risk import EstimatorKind
from .selection import Criterion

logger = logging.getLogger(__name__)

WORKERS_ENV = "PUBENCH_WORKERS"
LOG_LEVEL_ENV = "PUBENCH_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "INFO"

# Symmetric default mixture: means at +/-1.4 e1, unit scales.
DEFAULT_SEPARATION = 1.4


def read_key_values(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` file into a dict of raw strings.

    Lines are tokenized by python-dotenv's parser; this adds line-numbered
    errors for malformed lines and rejects repeated keys, which dotenv would
    silently overwrite.

    Raises:
        ConfigError: On a line without ``=``, an unparsable line or a repeated key.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    values: dict[str, str] = {}
    with path.open(encoding="utf-8") as stream:
        for binding in parse_stream(stream):
            raw = binding.original.string
            text = raw.strip()
            # A binding's span starts at any blank lines that precede it.
            number = binding.original.line + raw[: len(raw) - len(raw.lstrip())].count("\n")
            if binding.error:
                raise ConfigError(f"{path}, line {number}: cannot parse {text!r}")
            if binding.key is None:
                continue
            if binding.value is None:
                raise ConfigError(f"{path}, line {number}: expected 'key = value', got {text!r}")
            if binding.key in values:
                raise ConfigError(f"{path}, line {number}: duplicate key {binding.key!r}")
            values[binding.key] = binding.value.strip()
    return values


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(",") if item.strip())
    return value


class Sweep(BaseModel):
    """One swept parameter and the values it takes, e.g. ``c:0.2,0.4,0.6``."""

    model_config = ConfigDict(frozen=True)

    parameter: Literal["c", "n_p"]
    values: tuple[float, ...] = Field(..., min_length=1)

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        name, sep, raw_values = text.partition(":")
        if not sep:
            raise ValueError(f"sweep must look like 'c:0.2,0.4', got {text!r}")
        return cls(parameter=name.strip(), values=_split_list(raw_values))

    @property
    def name(self) -> str:
        return self.parameter

    def labels(self) -> list[str]:
        if self.parameter == "n_p":
            return [str(int(v)) for v in self.values]
        return [repr(v) for v in self.values]


class DataConfig(BaseModel):
    """Fields shared by ``bench`` and ``synth``: where data comes from and how PU data is made."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    seed: int = Field(0, ge=0, description="Master seed; every trial seed derives from it")
    dataset_kind: Literal["gaussian", "csv"] = Field(
        "gaussian", alias="dataset.kind", description="Synthetic mixture or labeled CSV file"
    )
    dataset_path: Path | None = Field(
        None, alias="dataset.path", description="Labeled CSV file when dataset.kind = csv"
    )
    dataset_dim: int = Field(2, ge=1, alias="dataset.dim", description="Feature dimension d")
    dataset_mean_pos: tuple[float, ...] | None = Field(
        None, alias="dataset.mean_pos", description="Positive class mean (default +1.4 e1)"
    )
    dataset_mean_neg: tuple[float, ...] | None = Field(
        None, alias="dataset.mean_neg", description="Negative class mean (default -1.4 e1)"
    )
    dataset_scale_pos: float = Field(
        1.0, gt=0, alias="dataset.scale_pos", description="Positive class standard deviation"
    )
    dataset_scale_neg: float = Field(
        1.0, gt=0, alias="dataset.scale_neg", description="Negative class standard deviation"
    )
    dataset_n_test: int = Field(
        10_000, ge=2, alias="dataset.n_test", description="Labeled test rows (gaussian)"
    )
    dataset_test_rate: float = Field(
        0.2, gt=0, lt=1, alias="dataset.test_rate", description="Held-out test share (csv)"
    )
    setting: Setting = Field(Setting.OS, description="OS or TS data generation")
    pi: float = Field(..., gt=0, lt=1, description="Class prior of the test distribution")
    c: float | None = Field(None, gt=0, le=1, description="OS label frequency")
    n: int | None = Field(None, ge=2, description="OS sample size before labeling")
    n_p: int | None = Field(None, ge=1, description="TS positive sample size")
    n_u: int | None = Field(None, ge=1, description="TS unlabeled sample size")

    @field_validator("setting", mode="before")
    @classmethod
    def _upper_setting(cls, value: Any) -> Any:
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("dataset_mean_pos", "dataset_mean_neg", mode="before")
    @classmethod
    def _split_means(cls, value: Any) -> Any:
        return _split_list(value)

    @model_validator(mode="after")
    def _check_data(self) -> "DataConfig":
        if self.dataset_kind == "csv" and self.dataset_path is None:
            raise ValueError("dataset.kind = csv needs dataset.path")
        if self.setting is Setting.OS:
            if self.c is None:
                raise ValueError("setting OS needs c")
            if self.dataset_kind == "gaussian" and self.n is None:
                raise ValueError("setting OS with a gaussian dataset needs n")
        else:
            if self.n_p is None or self.n_u is None:
                raise ValueError("setting TS needs n_p and n_u")
            if self.c is not None:
                raise ValueError("setting TS takes no c")
        if self.dataset_kind == "gaussian":
            self.mixture()
        return self

    def mixture(self) -> GaussianMixtureSpec:
        """The Gaussian mixture described by the ``dataset.*`` keys."""
        default = GaussianMixtureSpec.symmetric(
            self.dataset_dim, DEFAULT_SEPARATION, self.pi
        )
        try:
            return GaussianMixtureSpec(
                dim=self.dataset_dim,
                mean_pos=self.dataset_mean_pos or default.mean_pos,
                mean_neg=self.dataset_mean_neg or default.mean_neg,
                scale_pos=self.dataset_scale_pos,
                scale_neg=self.dataset_scale_neg,
                prior=self.pi,
            )
        except ValidationError as e:
            raise InvalidSpecError(str(e)) from e


class SynthesisConfig(DataConfig):
    """Config of ``pubench synth``: one PU training set and one labeled test set."""


class ExperimentConfig(DataConfig):
    """Config of ``pubench bench``."""

    val_rate: float = Field(0.2, gt=0, lt=1, description="Validation share of D_P and D_U")
    algo: tuple[str, ...] = Field(("upu", "upu-c"), min_length=1, description="Algorithm tokens")
    loss: LossKind = Field(LossKind.SIGMOID, description="Surrogate loss")
    model: ArchitectureKind = Field(ArchitectureKind.MLP, description="Classifier architecture")
    hidden: int = Field(32, ge=1, description="MLP hidden width")
    iterations: int = Field(2000, ge=0, description="SGD iterations per trial")
    eval_every: int = Field(100, ge=1, description="Checkpoint cadence in iterations")
    splits: int = Field(3, ge=1, description="Random data splits")
    draws: int = Field(10, ge=1, description="Random hyperparameter draws per split")
    search: Literal["mlp", "resnet", "default"] = Field(
        "mlp", description="Hyperparameter search space"
    )
    weight_decay: float = Field(1e-4, ge=0, description="L2 weight decay in the SGD step")
    tolerance: float = Field(0.0, ge=0, description="nnPU tolerance on the negative part")
    ascent_scale: float = Field(1.0, ge=0, description="nnPU-GA ascent step scale")
    criteria: tuple[Criterion, ...] = Field(
        (Criterion.PA, Criterion.PAUC), min_length=1, description="Validation criteria"
    )
    metrics: tuple[Metric, ...] = Field(tuple(Metric), min_length=1, description="Test metrics")
    oracle_mode: bool = Field(False, description="Allow criteria that read hidden labels")
    bootstrap: int = Field(0, ge=0, description="Bootstrap resamples for criterion SEs (0 = off)")
    sweep: Sweep | None = Field(None, description="Parameter sweep, e.g. c:0.2,0.4")
    workers: int | None = Field(None, ge=1, description="Worker pool size")
    out: Path = Field(Path("results"), description="Output directory")

    @field_validator("algo", "criteria", "metrics", mode="before")
    @classmethod
    def _split_tokens(cls, value: Any) -> Any:
        value = _split_list(value)
        if isinstance(value, tuple):
            return tuple(v.lower() if isinstance(v, str) else v for v in value)
        return value

    @field_validator("loss", "model", "search", mode="before")
    @classmethod
    def _lower(cls, value: Any) -> Any:
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("algo")
    @classmethod
    def _check_algorithms(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        for token in value:
            EstimatorKind.parse(token)
        return value

    @field_validator("sweep", mode="before")
    @classmethod
    def _parse_sweep(cls, value: Any) -> Any:
        if isinstance(value, str):
            return Sweep.parse(value) if value.strip() else None
        return value

    @model_validator(mode="after")
    def _check_experiment(self) -> "ExperimentConfig":
        if self.iterations < self.eval_every:
            raise ValueError(
                f"iterations ({self.iterations}) must be >= eval_every ({self.eval_every})"
            )
        if Criterion.OA in self.criteria and not self.oracle_mode:
            raise ValueError("criterion 'oa' requires oracle_mode = true")
        if self.sweep is not None:
            if self.sweep.parameter == "c" and self.setting is not Setting.OS:
                raise ValueError("a c sweep needs setting OS")
            if self.sweep.parameter == "n_p" and self.setting is not Setting.TS:
                raise ValueError("an n_p sweep needs setting TS")
        return self

    def estimator_kinds(self) -> list[EstimatorKind]:
        return [EstimatorKind.parse(token) for token in self.algo]

    def with_updates(self, **updates: Any) -> "ExperimentConfig":
        """A re-validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(updates)
        return type(self).model_validate(data)

    def for_sweep_value(self, value: float) -> "ExperimentConfig":
        if self.sweep is None:
            raise ConfigError("config has no sweep")
        if self.sweep.parameter == "n_p":
            return self.with_updates(sweep=None, n_p=int(value))
        return self.with_updates(sweep=None, c=value)


def _load(model: type[DataConfig], path: str | Path, overrides: dict[str, str] | None) -> Any:
    values = read_key_values(path)
    values.update(overrides or {})
    try:
        return model.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
    except InvalidSpecError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_experiment_config(
    path: str | Path, overrides: dict[str, str] | None = None
) -> ExperimentConfig:
    """Read and validate a ``bench`` config.

    Args:
        path: Config file.
        overrides: Raw ``key -> value`` pairs that replace file values.

    Raises:
        ConfigError: If a key is unknown or a value violates the schema.
    """
    config: ExperimentConfig = _load(ExperimentConfig, path, overrides)
    logger.debug("Loaded experiment config from %s", path)
    return config


def load_synthesis_config(
    path: str | Path, overrides: dict[str, str] | None = None
) -> SynthesisConfig:
    config: SynthesisConfig = _load(SynthesisConfig, path, overrides)
    return config


def resolve_workers(explicit: int | None = None) -> int:
    """Worker pool size: explicit value > PUBENCH_WORKERS > 1."""
    if explicit is not None:
        return explicit
    env_value = os.environ.get(WORKERS_ENV, "").strip()
    if not env_value:
        return 1
    try:
        workers = int(env_value)
    except ValueError as e:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env_value!r}") from e
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def resolve_log_level(explicit: str | None = None) -> str:
    """Log level name: explicit value > PUBENCH_LOG_LEVEL > INFO."""
    level = (explicit or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).strip().upper()
    if level not in logging.getLevelNamesMapping():
        raise ConfigError(f"unknown log level {level!r}")
    return level
