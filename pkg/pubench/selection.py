"""Model-selection criteria computed on a PU validation set.

Proxy accuracy (PA) and proxy AUC (PAUC) need only positive and unlabeled
validation rows. Oracle accuracy (OA) reads the hidden labels and is only
available when oracle mode is switched on explicitly.

In expectation PA = ACC + pi, and PAUC is an affine function of the true
AUC with slope (1 - pi_eff), where pi_eff is the class prior of the
unlabeled rows (pi under TS, the shifted prior under OS). ``pa_to_acc`` and
``pauc_to_auc`` invert those maps.

A score equal to the threshold counts as a positive prediction everywhere.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from .data import PuDataset, Setting
from .errors import InvalidSpecError, MissingOracleError
from .metrics import auc
from .model import Classifier

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


class Criterion(StrEnum):
    PA = "pa"
    PAUC = "pauc"
    OA = "oa"


def _check_prior(prior: float) -> None:
    if not 0 < prior < 1:
        raise InvalidSpecError(f"prior must lie in (0, 1), got {prior}")


# ------------------------------------------------------------------------------
# Score-level criteria


def proxy_accuracy_from_scores(
    positive_scores: npt.ArrayLike,
    unlabeled_scores: npt.ArrayLike,
    setting: Setting,
    prior: float,
    threshold: float = 0.0,
) -> float:
    """PA from precomputed scores.

    TS: (2 pi / n'_P) #{P: f >= t} + (1 / n'_U) #{U: f < t}
    OS: same positive term, negative term averaged over P and U together.
    """
    _check_prior(prior)
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    unl = np.asarray(unlabeled_scores, dtype=np.float64).ravel()
    if pos.size == 0 or unl.size == 0:
        raise InvalidSpecError("proxy accuracy needs positive and unlabeled scores")
    positive_term = 2 * prior * float(np.mean(pos >= threshold))
    if Setting(setting) is Setting.TS:
        negative_term = float(np.mean(unl < threshold))
    else:
        negative_term = float(np.mean(np.concatenate([pos, unl]) < threshold))
    return positive_term + negative_term


def proxy_auc_from_scores(
    positive_scores: npt.ArrayLike, unlabeled_scores: npt.ArrayLike
) -> float:
    """AUC of positives against unlabeled rows treated as negatives."""
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    unl = np.asarray(unlabeled_scores, dtype=np.float64).ravel()
    labels = np.concatenate([np.ones(pos.size), -np.ones(unl.size)])
    return auc(np.concatenate([pos, unl]), labels)


def accuracy_from_scores(
    scores: npt.ArrayLike, labels: npt.ArrayLike, threshold: float = 0.0
) -> float:
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    return float(np.mean(np.where(scores >= threshold, 1, -1) == labels))


# ------------------------------------------------------------------------------
# Classifier-level criteria


def proxy_accuracy(
    classifier: Classifier,
    val: PuDataset,
    prior: float | None = None,
    threshold: float = 0.0,
) -> float:
    """Proxy accuracy of ``classifier`` on a PU validation set.

    Args:
        classifier: Scorer to evaluate.
        val: Validation D'_P and D'_U.
        prior: Class prior pi; defaults to ``val.prior``.
        threshold: Decision threshold on the score.

    Returns:
        PA in [0, 2 pi + 1]. Not a probability.
    """
    return proxy_accuracy_from_scores(
        classifier.score(val.positives),
        classifier.score(val.unlabeled),
        val.setting,
        val.prior if prior is None else prior,
        threshold,
    )


def proxy_auc(classifier: Classifier, val: PuDataset) -> float:
    """Proxy AUC: positives ranked against unlabeled rows, ties count 1/2."""
    return proxy_auc_from_scores(classifier.score(val.positives), classifier.score(val.unlabeled))


def oracle_accuracy(classifier: Classifier, val: PuDataset, threshold: float = 0.0) -> float:
    """Accuracy against hidden labels.

    TS uses the unlabeled rows only; OS uses D'_P and D'_U together.

    Raises:
        MissingOracleError: If ``val`` carries no hidden labels.
    """
    view = val.oracle_view()
    return accuracy_from_scores(classifier.score(view.features), view.labels, threshold)


# ------------------------------------------------------------------------------
# Converters


def pa_to_acc(pa: float, prior: float) -> float:
    """Accuracy estimate from a proxy accuracy: ACC = PA - pi."""
    _check_prior(prior)
    return pa - prior


def pauc_to_auc(pauc: float, effective_prior: float) -> float:
    """AUC estimate from a proxy AUC: PAUC / (1 - pi_eff) - pi_eff / (2 - 2 pi_eff).

    ``effective_prior`` is the class prior of the unlabeled rows: pi under TS,
    (1 - c) pi / (1 - c pi) under OS.
    """
    if not 0 <= effective_prior < 1:
        raise InvalidSpecError(f"effective prior must lie in [0, 1), got {effective_prior}")
    return pauc / (1 - effective_prior) - effective_prior / (2 - 2 * effective_prior)


# ------------------------------------------------------------------------------
# Suite


@dataclass(frozen=True)
class ValidationScores:
    """Scores of one classifier on a validation set, shared by every criterion."""

    positive: FloatArray
    unlabeled: FloatArray
    oracle_labels: npt.NDArray[np.int64] | None = None

    @classmethod
    def compute(cls, classifier: Classifier, val: PuDataset) -> "ValidationScores":
        return cls(
            classifier.score(val.positives),
            classifier.score(val.unlabeled),
            val.oracle_unlabeled_labels,
        )


@dataclass(frozen=True)
class CriterionSuite:
    """The criteria evaluated at every checkpoint.

    OA reads hidden labels, so it is rejected unless ``oracle_mode`` is set.
    PA and PAUC are always computed on scores only, never on labels.
    """

    criteria: tuple[Criterion, ...]
    setting: Setting
    prior: float
    oracle_mode: bool = False

    def __post_init__(self) -> None:
        criteria = tuple(Criterion(c) for c in self.criteria)
        if not criteria:
            raise InvalidSpecError("at least one criterion is required")
        if Criterion.OA in criteria and not self.oracle_mode:
            raise MissingOracleError("criterion 'oa' requires oracle mode")
        _check_prior(self.prior)
        object.__setattr__(self, "criteria", criteria)
        object.__setattr__(self, "setting", Setting(self.setting))

    def value(self, criterion: Criterion, scores: ValidationScores, threshold: float = 0.0) -> float:
        if criterion is Criterion.PA:
            return proxy_accuracy_from_scores(
                scores.positive, scores.unlabeled, self.setting, self.prior, threshold
            )
        if criterion is Criterion.PAUC:
            return proxy_auc_from_scores(scores.positive, scores.unlabeled)
        if scores.oracle_labels is None:
            raise MissingOracleError("validation set carries no oracle labels")
        if self.setting is Setting.TS:
            return accuracy_from_scores(scores.unlabeled, scores.oracle_labels, threshold)
        return accuracy_from_scores(
            np.concatenate([scores.positive, scores.unlabeled]),
            np.concatenate([np.ones(scores.positive.size, dtype=np.int64), scores.oracle_labels]),
            threshold,
        )

    def evaluate(
        self, classifier: Classifier, val: PuDataset, threshold: float = 0.0
    ) -> dict[str, float]:
        scores = ValidationScores.compute(classifier, self._visible(val))
        return {c.value: self.value(c, scores, threshold) for c in self.criteria}

    def bootstrap_stderr(
        self,
        classifier: Classifier,
        val: PuDataset,
        n_boot: int,
        rng: np.random.Generator,
        threshold: float = 0.0,
    ) -> dict[str, float]:
        """Bootstrap standard errors of every criterion.

        D'_P and D'_U are resampled with replacement independently, the
        oracle labels travelling with their rows.
        """
        if n_boot < 2:
            raise InvalidSpecError(f"bootstrap needs at least 2 resamples, got {n_boot}")
        scores = ValidationScores.compute(classifier, self._visible(val))
        samples: dict[str, list[float]] = {c.value: [] for c in self.criteria}
        for _ in range(n_boot):
            p_rows = rng.integers(0, scores.positive.size, scores.positive.size)
            u_rows = rng.integers(0, scores.unlabeled.size, scores.unlabeled.size)
            resampled = ValidationScores(
                scores.positive[p_rows],
                scores.unlabeled[u_rows],
                None if scores.oracle_labels is None else scores.oracle_labels[u_rows],
            )
            for criterion in self.criteria:
                samples[criterion.value].append(self.value(criterion, resampled, threshold))
        return {name: float(np.std(values, ddof=1)) for name, values in samples.items()}

    def _visible(self, val: PuDataset) -> PuDataset:
        return val if self.oracle_mode else val.without_oracle()


def parse_criteria(tokens: Iterable[str]) -> tuple[Criterion, ...]:
    try:
        return tuple(Criterion(token.strip().lower()) for token in tokens)
    except ValueError as e:
        raise InvalidSpecError(f"{e}; expected one of {[c.value for c in Criterion]}") from e
