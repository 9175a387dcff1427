"""Test-set metrics: accuracy, AUC, precision, recall and F1.

A point is predicted positive when its score is >= the threshold. Metrics
whose denominator vanishes are reported as 0 with ``degenerate=True`` so
aggregation over trials never sees NaN.
"""

from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.stats import rankdata

from .errors import DimensionMismatchError, InvalidSpecError


class Metric(StrEnum):
    ACC = "acc"
    AUC = "auc"
    F1 = "f1"
    PRECISION = "precision"
    RECALL = "recall"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise InvalidSpecError(f"confusion counts must be non-negative: {self}")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MetricValue(NamedTuple):
    value: float
    degenerate: bool = False


def _paired(scores: npt.ArrayLike, labels: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise DimensionMismatchError(f"{scores.size} scores but {labels.size} labels")
    return scores, labels


def confusion(
    scores: npt.ArrayLike, labels: npt.ArrayLike, threshold: float = 0.0
) -> ConfusionCounts:
    scores, labels = _paired(scores, labels)
    predicted = scores >= threshold
    actual = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _ratio(numerator: int, denominator: int) -> MetricValue:
    if denominator == 0:
        return MetricValue(0.0, True)
    return MetricValue(numerator / denominator)


def accuracy(counts: ConfusionCounts) -> MetricValue:
    return _ratio(counts.tp + counts.tn, counts.n)


def precision(counts: ConfusionCounts) -> MetricValue:
    return _ratio(counts.tp, counts.tp + counts.fp)


def recall(counts: ConfusionCounts) -> MetricValue:
    return _ratio(counts.tp, counts.tp + counts.fn)


def f1(counts: ConfusionCounts) -> MetricValue:
    """Harmonic mean of precision and recall, computed as 2tp / (2tp + fp + fn).

    Degenerate whenever precision or recall is.
    """
    if counts.tp + counts.fp == 0 or counts.tp + counts.fn == 0:
        return MetricValue(0.0, True)
    return MetricValue(2 * counts.tp / (2 * counts.tp + counts.fp + counts.fn))


def auc(scores: npt.ArrayLike, labels: npt.ArrayLike) -> float:
    """Probability that a positive outranks a negative, ties counted as 1/2.

    Computed from midranks (Mann-Whitney U).

    Raises:
        InvalidSpecError: If only one class is present.
    """
    scores, labels = _paired(scores, labels)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = scores.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvalidSpecError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores, method="average")
    u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2
    return float(u_statistic / (n_pos * n_neg))


def pairwise_auc(scores: npt.ArrayLike, labels: npt.ArrayLike) -> float:
    """AUC by direct comparison of every positive-negative pair. O(n_pos * n_neg)."""
    scores, labels = _paired(scores, labels)
    pos = scores[labels == 1]
    neg = scores[labels != 1]
    if pos.size == 0 or neg.size == 0:
        raise InvalidSpecError("AUC needs at least one positive and one negative")
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return float(wins / (pos.size * neg.size))


_COUNT_METRICS = {
    Metric.ACC: accuracy,
    Metric.F1: f1,
    Metric.PRECISION: precision,
    Metric.RECALL: recall,
}


def evaluate_metrics(
    scores: npt.ArrayLike,
    labels: npt.ArrayLike,
    metrics: list[Metric],
    threshold: float = 0.0,
) -> dict[str, float]:
    """Named metric values in the order requested."""
    counts = confusion(scores, labels, threshold)
    values: dict[str, float] = {}
    for metric in metrics:
        if metric is Metric.AUC:
            values[metric.value] = auc(scores, labels)
        else:
            values[metric.value] = _COUNT_METRICS[metric](counts).value
    return values
