"""Datasets, Gaussian mixtures, PU synthesis and PU-preserving splits.

This module owns every container the rest of the package trades in:
fully labeled data, two-class isotropic Gaussian mixtures, and positive /
unlabeled datasets generated under either the one-sample (OS) or the
two-sample (TS) assumption. It also reads and writes the tabular CSV
formats used by the CLI.

Hidden labels of unlabeled rows are kept on ``PuDataset`` for oracle
criteria and diagnostics only. Training code reads data through
``PuDataset.observed()``, which does not expose them.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import StrEnum
from pathlib import Path
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import norm

from .errors import (
    CsvFormatError,
    DegenerateDrawError,
    DegenerateSplitError,
    DimensionMismatchError,
    InvalidSpecError,
    MissingOracleError,
)

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
LabelArray = npt.NDArray[np.int64]

_LABEL_TOKENS = {1: "+1", -1: "-1"}
_TOKEN_LABELS = {"+1": 1, "-1": -1}


class Setting(StrEnum):
    """How the positive and unlabeled sets were generated."""

    OS = "OS"
    TS = "TS"


def _readonly(values: npt.ArrayLike, dtype: type) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _check_labels(labels: np.ndarray, what: str) -> None:
    if not np.isin(labels, (1, -1)).all():
        raise InvalidSpecError(f"{what} must be +1 or -1")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with +1/-1 labels.

    Arrays are copied and made read-only on construction.
    """

    features: FloatArray
    labels: LabelArray

    def __post_init__(self) -> None:
        features = _readonly(self.features, np.float64)
        labels = _readonly(self.labels, np.int64)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise InvalidSpecError(f"features must be a non-empty n x d matrix, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DimensionMismatchError(
                f"{features.shape[0]} feature rows but labels have shape {labels.shape}"
            )
        if not np.isfinite(features).all():
            raise InvalidSpecError("features must be finite")
        _check_labels(labels, "labels")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def positive_fraction(self) -> float:
        return float(np.mean(self.labels == 1))

    def subset(self, rows: npt.ArrayLike) -> "LabeledDataset":
        """Return the rows selected by an index or boolean array."""
        return LabeledDataset(self.features[rows], self.labels[rows])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return np.array_equal(self.features, other.features) and np.array_equal(
            self.labels, other.labels
        )

    __hash__ = None  # type: ignore[assignment]


class GaussianMixtureSpec(BaseModel):
    """Two isotropic Gaussian class conditionals with a class prior."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    dim: int = Field(..., ge=1, description="Feature dimension d")
    mean_pos: tuple[float, ...] = Field(..., description="Mean of p(x|y=+1)")
    mean_neg: tuple[float, ...] = Field(..., description="Mean of p(x|y=-1)")
    scale_pos: float = Field(1.0, gt=0, description="Standard deviation of p(x|y=+1)")
    scale_neg: float = Field(1.0, gt=0, description="Standard deviation of p(x|y=-1)")
    prior: float = Field(..., gt=0, lt=1, description="Class prior p(y=+1)")

    @model_validator(mode="after")
    def _check_means(self) -> "GaussianMixtureSpec":
        for name, mean in (("mean_pos", self.mean_pos), ("mean_neg", self.mean_neg)):
            if len(mean) != self.dim:
                raise ValueError(f"{name} has length {len(mean)}, expected dim={self.dim}")
            if not all(math.isfinite(value) for value in mean):
                raise ValueError(f"{name} must be finite")
        return self

    @classmethod
    def symmetric(
        cls, dim: int, separation: float, prior: float, scale: float = 1.0
    ) -> "GaussianMixtureSpec":
        """Means at +/- separation along the first axis, equal scales."""
        offset = tuple([separation] + [0.0] * (dim - 1))
        return cls(
            dim=dim,
            mean_pos=offset,
            mean_neg=tuple(-value for value in offset),
            scale_pos=scale,
            scale_neg=scale,
            prior=prior,
        )

    def mean(self, label: int) -> FloatArray:
        return np.asarray(self.mean_pos if label == 1 else self.mean_neg, dtype=np.float64)

    def scale(self, label: int) -> float:
        return self.scale_pos if label == 1 else self.scale_neg

    def sample_class(self, label: int, n: int, rng: np.random.Generator) -> FloatArray:
        """Draw ``n`` rows from the class conditional of ``label``."""
        draws = rng.standard_normal((n, self.dim))
        return draws * self.scale(label) + self.mean(label)

    def bayes_classifier_weights(self) -> tuple[FloatArray, float]:
        """Weights and bias of the Bayes-optimal linear rule.

        Only defined for equal class scales, where the log posterior odds
        are linear in x.

        Raises:
            InvalidSpecError: If the class scales differ.
        """
        if self.scale_pos != self.scale_neg:
            raise InvalidSpecError("the Bayes rule is linear only for equal class scales")
        variance = self.scale_pos**2
        mu_pos, mu_neg = self.mean(1), self.mean(-1)
        weights = (mu_pos - mu_neg) / variance
        bias = (mu_neg @ mu_neg - mu_pos @ mu_pos) / (2 * variance) + math.log(
            self.prior / (1 - self.prior)
        )
        return weights, float(bias)

    def bayes_accuracy(self) -> float:
        return self.linear_accuracy(*self.bayes_classifier_weights())

    def _linear_score_moments(self, weights: FloatArray, bias: float, label: int) -> tuple[float, float]:
        weights = np.asarray(weights, dtype=np.float64)
        mean = float(weights @ self.mean(label) + bias)
        std = float(self.scale(label) * np.linalg.norm(weights))
        return mean, std

    def _positive_rate(self, weights: FloatArray, bias: float, label: int) -> float:
        mean, std = self._linear_score_moments(weights, bias, label)
        if std == 0.0:
            return 1.0 if mean >= 0 else 0.0
        return float(norm.cdf(mean / std))

    def linear_accuracy(self, weights: FloatArray, bias: float) -> float:
        """Exact accuracy of the rule ``w.x + b >= 0`` under this mixture."""
        tpr = self._positive_rate(weights, bias, 1)
        fpr = self._positive_rate(weights, bias, -1)
        return self.prior * tpr + (1 - self.prior) * (1 - fpr)

    def linear_auc(self, weights: FloatArray) -> float:
        """Exact AUC of the score ``w.x`` under this mixture."""
        mean_pos, std_pos = self._linear_score_moments(weights, 0.0, 1)
        mean_neg, std_neg = self._linear_score_moments(weights, 0.0, -1)
        spread = math.hypot(std_pos, std_neg)
        if spread == 0.0:
            return 0.5
        return float(norm.cdf((mean_pos - mean_neg) / spread))


class ObservedPuData(NamedTuple):
    """What a learning algorithm may read from a ``PuDataset``."""

    positives: FloatArray
    unlabeled: FloatArray
    prior: float
    label_frequency: float | None


@dataclass(frozen=True, eq=False)
class PuDataset:
    """Positive set D_P and unlabeled set D_U with their generation metadata."""

    positives: FloatArray
    unlabeled: FloatArray
    setting: Setting
    prior: float
    label_frequency: float | None = None
    oracle_unlabeled_labels: LabelArray | None = None

    def __post_init__(self) -> None:
        positives = _readonly(self.positives, np.float64)
        unlabeled = _readonly(self.unlabeled, np.float64)
        if positives.ndim != 2 or unlabeled.ndim != 2:
            raise InvalidSpecError("positives and unlabeled must be matrices")
        if positives.shape[0] < 1 or unlabeled.shape[0] < 1:
            raise InvalidSpecError(
                f"need n_P >= 1 and n_U >= 1, got {positives.shape[0]} and {unlabeled.shape[0]}"
            )
        if positives.shape[1] != unlabeled.shape[1] or positives.shape[1] < 1:
            raise DimensionMismatchError(
                f"positives have d={positives.shape[1]}, unlabeled have d={unlabeled.shape[1]}"
            )
        if not (np.isfinite(positives).all() and np.isfinite(unlabeled).all()):
            raise InvalidSpecError("features must be finite")
        if not 0 < self.prior < 1:
            raise InvalidSpecError(f"prior must lie in (0, 1), got {self.prior}")
        setting = Setting(self.setting)
        if setting is Setting.OS:
            if self.label_frequency is None or not 0 < self.label_frequency <= 1:
                raise InvalidSpecError(
                    f"OS data needs a label frequency in (0, 1], got {self.label_frequency}"
                )
            if not 0 <= os_prior(self.prior, self.label_frequency) < self.prior:
                raise InvalidSpecError("implied unlabeled prior must lie in [0, prior)")
        elif self.label_frequency is not None:
            raise InvalidSpecError("TS data has no label frequency")
        oracle = None
        if self.oracle_unlabeled_labels is not None:
            oracle = _readonly(self.oracle_unlabeled_labels, np.int64)
            if oracle.shape != (unlabeled.shape[0],):
                raise DimensionMismatchError(
                    f"{unlabeled.shape[0]} unlabeled rows but oracle labels have shape {oracle.shape}"
                )
            _check_labels(oracle, "oracle labels")
        object.__setattr__(self, "positives", positives)
        object.__setattr__(self, "unlabeled", unlabeled)
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "prior", float(self.prior))
        object.__setattr__(self, "oracle_unlabeled_labels", oracle)

    @property
    def n_p(self) -> int:
        return int(self.positives.shape[0])

    @property
    def n_u(self) -> int:
        return int(self.unlabeled.shape[0])

    @property
    def dim(self) -> int:
        return int(self.positives.shape[1])

    @property
    def has_oracle(self) -> bool:
        return self.oracle_unlabeled_labels is not None

    @property
    def unlabeled_prior(self) -> float:
        """Class prior of D_U: the shifted prior under OS, the test prior under TS."""
        if self.setting is Setting.OS:
            assert self.label_frequency is not None
            return os_prior(self.prior, self.label_frequency)
        return self.prior

    def observed(self) -> ObservedPuData:
        return ObservedPuData(self.positives, self.unlabeled, self.prior, self.label_frequency)

    def without_oracle(self) -> "PuDataset":
        return replace(self, oracle_unlabeled_labels=None)

    def oracle_view(self) -> LabeledDataset:
        """Rows with hidden labels revealed, as evaluated by oracle accuracy.

        TS keeps only the unlabeled rows (they follow the test distribution);
        OS returns D_P and D_U together, with D_P labeled +1.

        Raises:
            MissingOracleError: If the dataset carries no hidden labels.
        """
        if self.oracle_unlabeled_labels is None:
            raise MissingOracleError("dataset carries no oracle labels")
        if self.setting is Setting.TS:
            return LabeledDataset(self.unlabeled, self.oracle_unlabeled_labels)
        return LabeledDataset(
            np.vstack([self.positives, self.unlabeled]),
            np.concatenate([np.ones(self.n_p, dtype=np.int64), self.oracle_unlabeled_labels]),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PuDataset):
            return NotImplemented
        same_oracle = (self.oracle_unlabeled_labels is None) == (
            other.oracle_unlabeled_labels is None
        ) and (
            self.oracle_unlabeled_labels is None
            or np.array_equal(self.oracle_unlabeled_labels, other.oracle_unlabeled_labels)
        )
        return (
            self.setting is other.setting
            and self.prior == other.prior
            and self.label_frequency == other.label_frequency
            and np.array_equal(self.positives, other.positives)
            and np.array_equal(self.unlabeled, other.unlabeled)
            and same_oracle
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class PuSplit:
    """Training part and validation part (D'_P, D'_U) of one PU dataset."""

    train: PuDataset
    validation: PuDataset


class LabelFrequencyEstimate(NamedTuple):
    value: float
    raw: float
    clipped: bool


def os_prior(prior: float, c: float) -> float:
    """Class prior of the unlabeled pool under OS: (1-c)pi / (1-c pi)."""
    if not 0 < prior < 1:
        raise InvalidSpecError(f"prior must lie in (0, 1), got {prior}")
    if not 0 < c <= 1:
        raise InvalidSpecError(f"label frequency must lie in (0, 1], got {c}")
    return (1 - c) * prior / (1 - c * prior)


def label_frequency_ratio(n_p: int, n_u: int, prior: float) -> float:
    """Unclipped n_P / (pi (n_P + n_U)); may exceed 1 on small batches."""
    if n_p < 1 or n_u < 1:
        raise InvalidSpecError(f"need n_P >= 1 and n_U >= 1, got {n_p} and {n_u}")
    if not 0 < prior < 1:
        raise InvalidSpecError(f"prior must lie in (0, 1), got {prior}")
    return n_p / (prior * (n_p + n_u))


def estimate_label_frequency(n_p: int, n_u: int, prior: float) -> LabelFrequencyEstimate:
    """Estimate c as n_P / (pi (n_P + n_U)), clipped to 1.

    Values above 1 point at an underestimated prior or sampling noise; they
    are clipped and logged rather than rejected.
    """
    raw = label_frequency_ratio(n_p, n_u, prior)
    if raw > 1:
        logger.warning(
            "Label frequency estimate %.4f exceeds 1 (n_P=%d, n_U=%d, pi=%.4f); clipping to 1",
            raw,
            n_p,
            n_u,
            prior,
        )
        return LabelFrequencyEstimate(1.0, raw, True)
    return LabelFrequencyEstimate(raw, raw, False)


def _require_count(name: str, value: int, minimum: int) -> None:
    if value < minimum:
        raise InvalidSpecError(f"{name} must be >= {minimum}, got {value}")


def synthesize_labeled(
    spec: GaussianMixtureSpec, n: int, rng: np.random.Generator
) -> LabeledDataset:
    """Draw ``n`` labeled rows i.i.d. from the mixture.

    Labels are drawn first (+1 with probability ``spec.prior``), then the
    positive rows, then the negative rows.
    """
    _require_count("n", n, 1)
    labels = np.where(rng.random(n) < spec.prior, 1, -1)
    features = np.empty((n, spec.dim))
    for label in (1, -1):
        mask = labels == label
        features[mask] = spec.sample_class(label, int(mask.sum()), rng)
    return LabeledDataset(features, labels)


def make_ts_pu(
    spec: GaussianMixtureSpec, n_p: int, n_u: int, rng: np.random.Generator
) -> PuDataset:
    """Two-sample PU data: D_P from p(x|y=+1), D_U independently from p(x)."""
    _require_count("n_P", n_p, 1)
    _require_count("n_U", n_u, 1)
    positives = spec.sample_class(1, n_p, rng)
    unlabeled = synthesize_labeled(spec, n_u, rng)
    return PuDataset(
        positives=positives,
        unlabeled=unlabeled.features,
        setting=Setting.TS,
        prior=spec.prior,
        oracle_unlabeled_labels=unlabeled.labels,
    )


def os_from_labeled(
    labeled: LabeledDataset, c: float, prior: float, rng: np.random.Generator
) -> PuDataset:
    """Label each positive row independently with probability ``c``.

    Labeled rows form D_P; every other row goes to D_U with its label kept
    as an oracle label.

    Raises:
        DegenerateDrawError: If D_P or D_U comes out empty.
    """
    if not 0 < c <= 1:
        raise InvalidSpecError(f"label frequency must lie in (0, 1], got {c}")
    observed = (labeled.labels == 1) & (rng.random(labeled.n) < c)
    n_p = int(observed.sum())
    if n_p == 0 or n_p == labeled.n:
        raise DegenerateDrawError(
            f"OS draw produced n_P={n_p}, n_U={labeled.n - n_p}; retry with a larger n"
        )
    return PuDataset(
        positives=labeled.features[observed],
        unlabeled=labeled.features[~observed],
        setting=Setting.OS,
        prior=prior,
        label_frequency=c,
        oracle_unlabeled_labels=labeled.labels[~observed],
    )


def make_os_pu(
    spec: GaussianMixtureSpec, n: int, c: float, rng: np.random.Generator
) -> PuDataset:
    """One-sample PU data: n marginal draws, positives labeled with probability c."""
    _require_count("n", n, 2)
    return os_from_labeled(synthesize_labeled(spec, n, rng), c, spec.prior, rng)


def ts_from_labeled(
    labeled: LabeledDataset, n_p: int, n_u: int, prior: float, rng: np.random.Generator
) -> PuDataset:
    """Two-sample PU data from a finite labeled pool.

    D_P is drawn without replacement from the positive rows, D_U without
    replacement from the rows not used for D_P.

    Raises:
        DegenerateDrawError: If the pool cannot supply the requested sizes.
    """
    _require_count("n_P", n_p, 1)
    _require_count("n_U", n_u, 1)
    positive_rows = np.flatnonzero(labeled.labels == 1)
    if positive_rows.size < n_p:
        raise DegenerateDrawError(f"pool has {positive_rows.size} positives, need n_P={n_p}")
    chosen = rng.choice(positive_rows, size=n_p, replace=False)
    remaining = np.setdiff1d(np.arange(labeled.n), chosen)
    if remaining.size < n_u:
        raise DegenerateDrawError(f"pool has {remaining.size} rows left, need n_U={n_u}")
    unlabeled_rows = rng.choice(remaining, size=n_u, replace=False)
    return PuDataset(
        positives=labeled.features[chosen],
        unlabeled=labeled.features[unlabeled_rows],
        setting=Setting.TS,
        prior=prior,
        oracle_unlabeled_labels=labeled.labels[unlabeled_rows],
    )


def _take(pu: PuDataset, positive_rows: np.ndarray, unlabeled_rows: np.ndarray) -> PuDataset:
    oracle = pu.oracle_unlabeled_labels
    return replace(
        pu,
        positives=pu.positives[positive_rows],
        unlabeled=pu.unlabeled[unlabeled_rows],
        oracle_unlabeled_labels=None if oracle is None else oracle[unlabeled_rows],
    )


def split_validation(pu: PuDataset, rate: float, rng: np.random.Generator) -> PuSplit:
    """Move each row of D_P and D_U to validation independently with probability ``rate``.

    Per-row Bernoulli assignment keeps D'_P and D'_U together an i.i.d.
    marginal sample under OS.

    Raises:
        DegenerateSplitError: If any of the four resulting sets is empty.
    """
    if not 0 < rate < 1:
        raise InvalidSpecError(f"validation rate must lie in (0, 1), got {rate}")
    to_val_p = rng.random(pu.n_p) < rate
    to_val_u = rng.random(pu.n_u) < rate
    counts = {
        "train D_P": int((~to_val_p).sum()),
        "train D_U": int((~to_val_u).sum()),
        "validation D_P": int(to_val_p.sum()),
        "validation D_U": int(to_val_u.sum()),
    }
    empty = [name for name, count in counts.items() if count == 0]
    if empty:
        raise DegenerateSplitError(f"split at rate {rate} left {', '.join(empty)} empty")
    return PuSplit(
        train=_take(pu, ~to_val_p, ~to_val_u),
        validation=_take(pu, to_val_p, to_val_u),
    )


# ------------------------------------------------------------------------------
# CSV


def _feature_names(dim: int) -> list[str]:
    return [f"f{j}" for j in range(dim)]


def _read_metadata(path: Path) -> dict[str, str]:
    metadata: dict[str, str] = {}
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            stripped = line.strip()
            if not stripped:
                continue
            if not stripped.startswith("#"):
                break
            key, sep, value = stripped.lstrip("#").partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
    return metadata


def _parse_features(frame: pd.DataFrame, names: list[str], path: Path) -> FloatArray:
    features = np.empty((len(frame), len(names)))
    for j, name in enumerate(names):
        tokens = frame[name].to_numpy(dtype=object)
        try:
            column = tokens.astype(np.float64)
        except ValueError:
            column = None
        if column is None or not np.isfinite(column).all():
            for row, token in enumerate(tokens):
                try:
                    value = float(token)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise CsvFormatError(
                        path, f"expected a finite number, got {token!r}", row=row + 1, column=name
                    )
        assert column is not None
        features[:, j] = column
    return features


def _parse_tokens(
    frame: pd.DataFrame, column: str, allowed: dict[str, int], path: Path
) -> LabelArray:
    values = np.empty(len(frame), dtype=np.int64)
    for row, token in enumerate(frame[column].to_numpy(dtype=object)):
        key = str(token).strip()
        if key not in allowed:
            raise CsvFormatError(
                path,
                f"unknown token {token!r}, expected one of {sorted(allowed)}",
                row=row + 1,
                column=column,
            )
        values[row] = allowed[key]
    return values


def load_csv(
    path: str | Path,
    *,
    setting: Setting | str | None = None,
    prior: float | None = None,
    label_frequency: float | None = None,
) -> LabeledDataset | PuDataset:
    """Load a labeled or a PU CSV file.

    The schema is chosen from the header: ``f0,...,f{d-1},label`` for labeled
    data, ``f0,...,f{d-1},observed,oracle_label`` for PU data. PU files carry
    their setting, prior and label frequency in leading ``# key=value``
    comment lines; keyword arguments override them.

    Args:
        path: File to read (UTF-8).
        setting: Override for the PU setting.
        prior: Override for the class prior.
        label_frequency: Override for the OS label frequency.

    Returns:
        The parsed dataset.

    Raises:
        CsvFormatError: On schema mismatch, non-finite values or unknown tokens.
    """
    path = Path(path)
    metadata = _read_metadata(path)
    frame = pd.read_csv(
        path, comment="#", dtype=str, keep_default_na=False, encoding="utf-8"
    )
    columns = [str(name).strip() for name in frame.columns]
    frame.columns = pd.Index(columns)
    if len(frame) == 0:
        raise CsvFormatError(path, "file has no data rows")

    if columns[-1:] == ["label"]:
        names = columns[:-1]
        if not names or names != _feature_names(len(names)):
            raise CsvFormatError(path, f"expected header f0..f{{d-1}},label, got {columns}")
        features = _parse_features(frame, names, path)
        labels = _parse_tokens(frame, "label", _TOKEN_LABELS, path)
        return LabeledDataset(features, labels)

    if columns[-2:] != ["observed", "oracle_label"]:
        raise CsvFormatError(path, f"unrecognized header {columns}")
    names = columns[:-2]
    if not names or names != _feature_names(len(names)):
        raise CsvFormatError(path, f"expected header f0..f{{d-1}},observed,oracle_label, got {columns}")
    features = _parse_features(frame, names, path)
    observed = _parse_tokens(frame, "observed", {"P": 1, "U": 0}, path).astype(bool)
    oracle = _parse_tokens(frame, "oracle_label", {**_TOKEN_LABELS, "NA": 0}, path)

    bad_positive = np.flatnonzero(observed & (oracle == -1))
    if bad_positive.size:
        raise CsvFormatError(
            path, "observed positives cannot carry oracle label -1",
            row=int(bad_positive[0]) + 1, column="oracle_label",
        )
    unlabeled_oracle = oracle[~observed]
    if np.all(unlabeled_oracle == 0):
        oracle_labels = None
    elif np.all(unlabeled_oracle != 0):
        oracle_labels = unlabeled_oracle
    else:
        raise CsvFormatError(path, "oracle labels of unlabeled rows must be all present or all NA")

    setting_value = setting if setting is not None else metadata.get("setting")
    prior_value = prior if prior is not None else metadata.get("prior")
    frequency_value = label_frequency if label_frequency is not None else metadata.get("label_frequency")
    if setting_value is None or prior_value is None:
        raise CsvFormatError(path, "PU file needs a setting and a prior (metadata or arguments)")
    try:
        parsed_setting = Setting(str(setting_value).upper())
    except ValueError as e:
        raise CsvFormatError(path, f"unknown setting {setting_value!r}") from e
    return PuDataset(
        positives=features[observed],
        unlabeled=features[~observed],
        setting=parsed_setting,
        prior=float(prior_value),
        label_frequency=None if frequency_value is None else float(frequency_value),
        oracle_unlabeled_labels=oracle_labels,
    )


def _format_features(features: FloatArray) -> dict[str, list[str]]:
    # repr is the shortest string that parses back to the same float.
    return {
        name: [repr(value) for value in features[:, j].tolist()]
        for j, name in enumerate(_feature_names(features.shape[1]))
    }


def save_csv(dataset: LabeledDataset | PuDataset, path: str | Path) -> None:
    """Write a dataset in the format ``load_csv`` reads back exactly."""
    path = Path(path)
    comments: list[str] = []
    if isinstance(dataset, LabeledDataset):
        frame = pd.DataFrame(_format_features(dataset.features))
        frame["label"] = [_LABEL_TOKENS[label] for label in dataset.labels.tolist()]
    else:
        frame = pd.DataFrame(_format_features(np.vstack([dataset.positives, dataset.unlabeled])))
        frame["observed"] = ["P"] * dataset.n_p + ["U"] * dataset.n_u
        if dataset.oracle_unlabeled_labels is None:
            unlabeled_tokens = ["NA"] * dataset.n_u
        else:
            unlabeled_tokens = [_LABEL_TOKENS[y] for y in dataset.oracle_unlabeled_labels.tolist()]
        frame["oracle_label"] = ["+1"] * dataset.n_p + unlabeled_tokens
        comments = [f"# setting={dataset.setting.value}", f"# prior={dataset.prior!r}"]
        if dataset.label_frequency is not None:
            comments.append(f"# label_frequency={dataset.label_frequency!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in comments:
            handle.write(line + "\n")
        frame.to_csv(handle, index=False, lineterminator="\n")
