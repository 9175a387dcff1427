"""PU risk estimators, the replenishment wrapper and the training loop.

Every estimator is a weighted sum of surrogate-loss terms over the positive
and unlabeled mini-batches:

- uPU: (pi/p) sum_P [l(f,+1) - l(f,-1)] + (1/u) sum_U l(f,-1)
- calibrated (OS): (pi/p) sum_P [l(f,+1) + (c-1) l(f,-1)] + ((1-c pi)/u) sum_U l(f,-1)
- nnPU: uPU with the negative part clamped at zero

Under OS the unlabeled pool is shifted towards the negative class, which
biases uPU. Replenishing the unlabeled batch with the positive batch
(U u P) removes the shift; with c = p / (pi (p + u)) the replenished uPU
value equals the calibrated value exactly.

nnPU-GA is implemented as the usual gradient-ascent correction: when the
negative part falls below -tolerance, the step ascends on the negative part
(scaled by ``ascent_scale``) instead of descending on the objective.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .data import GaussianMixtureSpec, PuDataset, label_frequency_ratio, os_prior
from .errors import DimensionMismatchError, InvalidSpecError, NonFiniteError
from .model import (
    Classifier,
    OptimizerState,
    SurrogateLoss,
    sgd_step,
    weighted_loss_and_grad,
)

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


class BaseAlgorithm(StrEnum):
    UPU = "upu"
    NNPU = "nnpu"
    NNPU_GA = "nnpu-ga"
    PUSB = "pusb"


_CALIBRATED_SUFFIX = "-c"
_DIRECT_TOKEN = "upu-direct"


@dataclass(frozen=True)
class EstimatorKind:
    """Which estimator to train with.

    Tokens: ``upu``, ``nnpu``, ``nnpu-ga``, ``pusb``, each optionally with a
    ``-c`` suffix (replenished unlabeled batches), plus ``upu-direct`` which
    evaluates the calibrated formula directly.
    """

    base: BaseAlgorithm
    calibrated: bool = False
    direct_calibrated: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", BaseAlgorithm(self.base))
        if self.direct_calibrated and (self.base is not BaseAlgorithm.UPU or self.calibrated):
            raise InvalidSpecError("direct calibrated evaluation only applies to plain uPU")

    @classmethod
    def parse(cls, token: str) -> "EstimatorKind":
        token = token.strip().lower()
        if token == _DIRECT_TOKEN:
            return cls(BaseAlgorithm.UPU, direct_calibrated=True)
        calibrated = token.endswith(_CALIBRATED_SUFFIX)
        base = token[: -len(_CALIBRATED_SUFFIX)] if calibrated else token
        try:
            return cls(BaseAlgorithm(base), calibrated=calibrated)
        except ValueError as e:
            raise InvalidSpecError(f"unknown algorithm {token!r}") from e

    @property
    def token(self) -> str:
        if self.direct_calibrated:
            return _DIRECT_TOKEN
        return self.base.value + (_CALIBRATED_SUFFIX if self.calibrated else "")

    @property
    def objective_name(self) -> str:
        return _DIRECT_TOKEN if self.direct_calibrated else self.base.value

    @property
    def thresholds_by_prior(self) -> bool:
        return self.base is BaseAlgorithm.PUSB


@dataclass(frozen=True, eq=False)
class RiskBatch:
    """One positive and one unlabeled mini-batch with the class prior."""

    positive_batch: FloatArray
    unlabeled_batch: FloatArray
    prior: float
    label_frequency: float | None = None

    def __post_init__(self) -> None:
        positives = np.asarray(self.positive_batch, dtype=np.float64)
        unlabeled = np.asarray(self.unlabeled_batch, dtype=np.float64)
        if positives.ndim != 2 or unlabeled.ndim != 2:
            raise DimensionMismatchError("mini-batches must be matrices")
        if positives.shape[0] < 1 or unlabeled.shape[0] < 1:
            raise InvalidSpecError("mini-batches must be non-empty")
        if positives.shape[1] != unlabeled.shape[1]:
            raise DimensionMismatchError(
                f"positive batch has d={positives.shape[1]}, unlabeled batch d={unlabeled.shape[1]}"
            )
        if not 0 < self.prior < 1:
            raise InvalidSpecError(f"prior must lie in (0, 1), got {self.prior}")
        if self.label_frequency is not None and not (
            np.isfinite(self.label_frequency) and self.label_frequency > 0
        ):
            raise InvalidSpecError(f"label frequency must be positive, got {self.label_frequency}")
        object.__setattr__(self, "positive_batch", positives)
        object.__setattr__(self, "unlabeled_batch", unlabeled)

    @property
    def p(self) -> int:
        return int(self.positive_batch.shape[0])

    @property
    def u(self) -> int:
        return int(self.unlabeled_batch.shape[0])


class RiskValue(NamedTuple):
    total: float
    positive_part: float
    negative_part: float


class _Terms(NamedTuple):
    features: FloatArray
    signs: FloatArray
    weights: FloatArray


def _positive_terms(batch: RiskBatch) -> _Terms:
    return _Terms(
        batch.positive_batch,
        np.ones(batch.p),
        np.full(batch.p, batch.prior / batch.p),
    )


def _negative_terms(batch: RiskBatch, positive_coef: float, unlabeled_coef: float) -> _Terms:
    return _Terms(
        np.vstack([batch.positive_batch, batch.unlabeled_batch]),
        -np.ones(batch.p + batch.u),
        np.concatenate(
            [np.full(batch.p, positive_coef / batch.p), np.full(batch.u, unlabeled_coef / batch.u)]
        ),
    )


def _upu_negative_terms(batch: RiskBatch) -> _Terms:
    return _negative_terms(batch, -batch.prior, 1.0)


def _calibrated_negative_terms(batch: RiskBatch) -> _Terms:
    c = batch.label_frequency
    if c is None:
        raise InvalidSpecError("the calibrated estimator needs a label frequency")
    return _negative_terms(batch, batch.prior * (c - 1), 1 - c * batch.prior)


class _Parts(NamedTuple):
    positive: float
    positive_grad: FloatArray
    negative: float
    negative_grad: FloatArray


def _evaluate(
    batch: RiskBatch,
    classifier: Classifier,
    loss: SurrogateLoss,
    negative_terms: Callable[[RiskBatch], _Terms],
) -> _Parts:
    positive, positive_grad = weighted_loss_and_grad(classifier, *_positive_terms(batch), loss)
    negative, negative_grad = weighted_loss_and_grad(classifier, *negative_terms(batch), loss)
    return _Parts(positive, positive_grad, negative, negative_grad)


def upu_risk(batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss) -> RiskValue:
    """Unbiased PU risk estimate under the two-sample assumption."""
    parts = _evaluate(batch, classifier, loss, _upu_negative_terms)
    return RiskValue(parts.positive + parts.negative, parts.positive, parts.negative)


def calibrated_risk(batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss) -> RiskValue:
    """Risk estimate that stays unbiased under the one-sample assumption.

    Raises:
        InvalidSpecError: If the batch carries no label frequency.
    """
    parts = _evaluate(batch, classifier, loss, _calibrated_negative_terms)
    return RiskValue(parts.positive + parts.negative, parts.positive, parts.negative)


def _clamp(parts: _Parts, tolerance: float) -> tuple[RiskValue, bool]:
    if parts.negative >= -tolerance:
        return RiskValue(parts.positive + parts.negative, parts.positive, parts.negative), False
    return RiskValue(parts.positive, parts.positive, 0.0), True


def nnpu_risk(
    batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss, tolerance: float = 0.0
) -> tuple[RiskValue, bool]:
    """Non-negative PU risk and whether the negative part was clamped."""
    return _clamp(_evaluate(batch, classifier, loss, _upu_negative_terms), tolerance)


def replenish_batch(p_batch: FloatArray, u_batch: FloatArray) -> FloatArray:
    """Unlabeled batch followed by the positive batch (multiset union, no dedup)."""
    p_batch = np.asarray(p_batch, dtype=np.float64)
    u_batch = np.asarray(u_batch, dtype=np.float64)
    if p_batch.ndim != 2 or u_batch.ndim != 2 or p_batch.shape[1] != u_batch.shape[1]:
        raise DimensionMismatchError(
            f"cannot stack batches of shape {u_batch.shape} and {p_batch.shape}"
        )
    if p_batch.shape[0] < 1:
        raise InvalidSpecError("replenishment needs a non-empty positive batch")
    return np.vstack([u_batch, p_batch])


# ------------------------------------------------------------------------------
# Objectives


@dataclass(frozen=True)
class ObjectiveOptions:
    tolerance: float = 0.0
    ascent_scale: float = 1.0


class ObjectiveStep(NamedTuple):
    """Objective value on a batch and the direction handed to the optimizer."""

    risk: RiskValue
    grad: FloatArray
    corrected: bool
    upu_total: float


Objective = Callable[[RiskBatch, Classifier, SurrogateLoss, ObjectiveOptions], ObjectiveStep]

_OBJECTIVES: dict[str, Objective] = {}


def register_objective(name: str) -> Callable[[Objective], Objective]:
    """Register a training objective under an algorithm name."""

    def decorator(objective: Objective) -> Objective:
        _OBJECTIVES[name] = objective
        return objective

    return decorator


def get_objective(name: str) -> Objective:
    try:
        return _OBJECTIVES[name]
    except KeyError as e:
        raise InvalidSpecError(
            f"no objective registered for {name!r}; known: {sorted(_OBJECTIVES)}"
        ) from e


def _unclamped_step(parts: _Parts) -> ObjectiveStep:
    total = parts.positive + parts.negative
    return ObjectiveStep(
        RiskValue(total, parts.positive, parts.negative),
        parts.positive_grad + parts.negative_grad,
        False,
        total,
    )


@register_objective(BaseAlgorithm.UPU.value)
def _upu_objective(
    batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss, options: ObjectiveOptions
) -> ObjectiveStep:
    return _unclamped_step(_evaluate(batch, classifier, loss, _upu_negative_terms))


@register_objective(_DIRECT_TOKEN)
def _direct_calibrated_objective(
    batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss, options: ObjectiveOptions
) -> ObjectiveStep:
    # Raw batch-level c keeps this identical to replenished uPU.
    c = label_frequency_ratio(batch.p, batch.u, batch.prior)
    batch = replace(batch, label_frequency=c)
    return _unclamped_step(_evaluate(batch, classifier, loss, _calibrated_negative_terms))


@register_objective(BaseAlgorithm.NNPU.value)
@register_objective(BaseAlgorithm.PUSB.value)
def _nnpu_objective(
    batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss, options: ObjectiveOptions
) -> ObjectiveStep:
    parts = _evaluate(batch, classifier, loss, _upu_negative_terms)
    risk, corrected = _clamp(parts, options.tolerance)
    grad = parts.positive_grad if corrected else parts.positive_grad + parts.negative_grad
    return ObjectiveStep(risk, grad, corrected, parts.positive + parts.negative)


@register_objective(BaseAlgorithm.NNPU_GA.value)
def _nnpu_ga_objective(
    batch: RiskBatch, classifier: Classifier, loss: SurrogateLoss, options: ObjectiveOptions
) -> ObjectiveStep:
    parts = _evaluate(batch, classifier, loss, _upu_negative_terms)
    risk, corrected = _clamp(parts, options.tolerance)
    if not corrected:
        return _unclamped_step(parts)
    return ObjectiveStep(
        risk, -options.ascent_scale * parts.negative_grad, True, parts.positive + parts.negative
    )


def _frozen_ascent(step: ObjectiveStep, options: ObjectiveOptions) -> bool:
    # A zero-scaled ascent is no update at all, not a decay-only step.
    return step.corrected and options.ascent_scale == 0


def nnpu_ga_step(
    batch: RiskBatch,
    classifier: Classifier,
    opt: OptimizerState,
    loss: SurrogateLoss,
    tolerance: float = 0.0,
    ascent_scale: float = 1.0,
) -> tuple[Classifier, OptimizerState]:
    """One nnPU-GA update: descend on nnPU, or ascend on a negative part below -tolerance.

    A corrected step with ``ascent_scale = 0`` returns the classifier and the
    optimizer state unchanged; no weight decay or momentum is applied.
    """
    options = ObjectiveOptions(tolerance, ascent_scale)
    step = _nnpu_ga_objective(batch, classifier, loss, options)
    if _frozen_ascent(step, options):
        return classifier, opt
    return sgd_step(classifier, step.grad, opt)


# ------------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainingSchedule:
    iterations: int
    batch_p: int
    batch_u: int
    eval_every: int

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise InvalidSpecError(f"iterations must be >= 0, got {self.iterations}")
        if self.batch_p < 1 or self.batch_u < 1 or self.eval_every < 1:
            raise InvalidSpecError("batch sizes and eval_every must be >= 1")


class StepRecord(NamedTuple):
    iteration: int
    objective: RiskValue
    upu_total: float
    corrected: bool


@dataclass
class TrainingOutcome:
    classifier: Classifier
    optimizer: OptimizerState
    steps: list[StepRecord] = field(default_factory=list)
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


Observer = Callable[[int, Classifier], None]


class _BatchCycler:
    """Shuffled pass over one pool; reshuffles when fewer than a batch rows remain."""

    def __init__(self, pool: FloatArray, batch_size: int, rng: np.random.Generator) -> None:
        if batch_size > pool.shape[0]:
            raise InvalidSpecError(f"batch size {batch_size} exceeds pool size {pool.shape[0]}")
        self._pool = pool
        self._batch_size = batch_size
        self._rng = rng
        self._order = rng.permutation(pool.shape[0])
        self._cursor = 0

    def next(self) -> FloatArray:
        if self._cursor + self._batch_size > self._order.size:
            self._order = self._rng.permutation(self._order.size)
            self._cursor = 0
        rows = self._order[self._cursor : self._cursor + self._batch_size]
        self._cursor += self._batch_size
        return self._pool[rows]


def train_ts(
    kind: EstimatorKind,
    pu: PuDataset,
    classifier: Classifier,
    opt: OptimizerState,
    loss: SurrogateLoss,
    schedule: TrainingSchedule,
    rng: np.random.Generator,
    observer: Observer | None = None,
    options: ObjectiveOptions | None = None,
) -> TrainingOutcome:
    """Mini-batch SGD on a PU objective.

    Each iteration fetches one positive and one unlabeled mini-batch, replenishes
    the unlabeled batch with the positive one when ``kind.calibrated``, and takes
    an optimizer step along the objective's direction. ``observer`` is called
    every ``schedule.eval_every`` iterations with the updated classifier.

    A non-finite objective or update ends training early; the outcome then
    carries the reason in ``failure`` and the last finite classifier.
    """
    options = options or ObjectiveOptions()
    objective = get_objective(kind.objective_name)
    data = pu.observed()
    positives = _BatchCycler(data.positives, schedule.batch_p, rng)
    unlabeled = _BatchCycler(data.unlabeled, schedule.batch_u, rng)
    steps: list[StepRecord] = []

    for iteration in range(1, schedule.iterations + 1):
        p_batch = positives.next()
        u_batch = unlabeled.next()
        if kind.calibrated:
            u_batch = replenish_batch(p_batch, u_batch)
        batch = RiskBatch(p_batch, u_batch, data.prior, data.label_frequency)
        try:
            step = objective(batch, classifier, loss, options)
            if not (kind.base is BaseAlgorithm.NNPU_GA and _frozen_ascent(step, options)):
                classifier, opt = sgd_step(classifier, step.grad, opt)
        except NonFiniteError as e:
            logger.warning("%s training diverged at iteration %d: %s", kind.token, iteration, e)
            return TrainingOutcome(classifier, opt, steps, f"diverged at iteration {iteration}: {e}")
        steps.append(StepRecord(iteration, step.risk, step.upu_total, step.corrected))
        if observer is not None and iteration % schedule.eval_every == 0:
            observer(iteration, classifier)

    return TrainingOutcome(classifier, opt, steps)


# ------------------------------------------------------------------------------
# Oracles and thresholding


class MonteCarloEstimate(NamedTuple):
    value: float
    stderr: float


def _require_draws(mc_n: int, minimum: int) -> None:
    if mc_n < minimum:
        raise InvalidSpecError(f"need at least {minimum} Monte-Carlo draws, got {mc_n}")


def monte_carlo_risk(
    spec: GaussianMixtureSpec,
    classifier: Classifier,
    loss: SurrogateLoss,
    mc_n: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Classification risk R(f) estimated with ``mc_n`` draws per class."""
    _require_draws(mc_n, 2)
    pos_loss = loss.value(classifier.score(spec.sample_class(1, mc_n, rng)), 1.0)
    neg_loss = loss.value(classifier.score(spec.sample_class(-1, mc_n, rng)), -1.0)
    pi = spec.prior
    value = pi * pos_loss.mean() + (1 - pi) * neg_loss.mean()
    variance = (pi**2 * pos_loss.var(ddof=1) + (1 - pi) ** 2 * neg_loss.var(ddof=1)) / mc_n
    return MonteCarloEstimate(float(value), float(np.sqrt(variance)))


def expected_bias_oracle(
    spec: GaussianMixtureSpec,
    classifier: Classifier,
    loss: SurrogateLoss,
    c: float,
    mc_n: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Expected bias of uPU under OS: (pi_bar - pi)(E_+[l(f,-1)] - E_-[l(f,-1)])."""
    _require_draws(mc_n, 10_000)
    shift = os_prior(spec.prior, c) - spec.prior
    pos_loss = loss.value(classifier.score(spec.sample_class(1, mc_n, rng)), -1.0)
    neg_loss = loss.value(classifier.score(spec.sample_class(-1, mc_n, rng)), -1.0)
    value = shift * (pos_loss.mean() - neg_loss.mean())
    stderr = abs(shift) * np.sqrt((pos_loss.var(ddof=1) + neg_loss.var(ddof=1)) / mc_n)
    return MonteCarloEstimate(float(value), float(stderr))


def pusb_threshold(scores: npt.ArrayLike, prior: float) -> float:
    """Score cut that predicts the top floor(pi m) points positive.

    A point is positive iff its score is >= the returned threshold, so ties at
    the threshold are all positive. With floor(pi m) = 0 the threshold is +inf.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        raise InvalidSpecError("cannot threshold an empty score vector")
    if not 0 < prior < 1:
        raise InvalidSpecError(f"prior must lie in (0, 1), got {prior}")
    m = scores.size
    k = int(np.floor(prior * m))
    if k == 0:
        return float("inf")
    return float(np.sort(scores)[m - k])
