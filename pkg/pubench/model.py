"""Scorers, surrogate losses and the SGD optimizer.

Classifiers are value types: a fixed architecture plus a flat parameter
vector. Every risk estimator in ``pubench.risk`` is a weighted sum of loss
terms, so ``weighted_loss_and_grad`` is the single place where scores,
losses and gradients are computed.
"""

from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import expit, log_expit

from .errors import DimensionMismatchError, InvalidSpecError, NonFiniteError

FloatArray = npt.NDArray[np.float64]


class LossKind(StrEnum):
    LOGISTIC = "logistic"
    SIGMOID = "sigmoid"
    SQUARED = "squared"


@dataclass(frozen=True)
class SurrogateLoss:
    """Binary surrogate loss l(z, y) with its derivative in z.

    - logistic: ln(1 + exp(-yz)), 1-Lipschitz
    - sigmoid: 1 / (1 + exp(yz)), bounded in (0, 1)
    - squared: (1 - yz)^2 / 4
    """

    kind: LossKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LossKind(self.kind))

    def value(self, z: npt.ArrayLike, y: npt.ArrayLike) -> FloatArray:
        margin = np.asarray(y, dtype=np.float64) * np.asarray(z, dtype=np.float64)
        if self.kind is LossKind.LOGISTIC:
            return -log_expit(margin)
        if self.kind is LossKind.SIGMOID:
            return expit(-margin)
        return (1.0 - margin) ** 2 / 4.0

    def derivative(self, z: npt.ArrayLike, y: npt.ArrayLike) -> FloatArray:
        y = np.asarray(y, dtype=np.float64)
        margin = y * np.asarray(z, dtype=np.float64)
        if self.kind is LossKind.LOGISTIC:
            return -y * expit(-margin)
        if self.kind is LossKind.SIGMOID:
            return -y * expit(-margin) * expit(margin)
        return -y * (1.0 - margin) / 2.0


class ArchitectureKind(StrEnum):
    LINEAR = "linear"
    MLP = "mlp"


class Architecture(BaseModel):
    """Shape of a scorer; serialized next to its parameters in trial records."""

    model_config = ConfigDict(frozen=True)

    kind: ArchitectureKind = Field(..., description="linear or one-hidden-layer tanh MLP")
    input_dim: int = Field(..., ge=1, description="Feature dimension d")
    hidden: int = Field(0, ge=0, description="Hidden width h (0 for linear)")

    @model_validator(mode="after")
    def _check_hidden(self) -> "Architecture":
        if self.kind is ArchitectureKind.MLP and self.hidden < 1:
            raise ValueError("an MLP needs hidden >= 1")
        if self.kind is ArchitectureKind.LINEAR and self.hidden != 0:
            raise ValueError("a linear scorer has no hidden layer")
        return self

    @classmethod
    def linear(cls, input_dim: int) -> "Architecture":
        return cls(kind=ArchitectureKind.LINEAR, input_dim=input_dim)

    @classmethod
    def mlp(cls, input_dim: int, hidden: int) -> "Architecture":
        return cls(kind=ArchitectureKind.MLP, input_dim=input_dim, hidden=hidden)

    @property
    def parameter_count(self) -> int:
        d, h = self.input_dim, self.hidden
        if self.kind is ArchitectureKind.LINEAR:
            return d + 1
        return h * (d + 1) + h + 1


class ClassifierSnapshot(BaseModel):
    """JSON form of a classifier: architecture descriptor plus flat parameters."""

    architecture: Architecture
    parameters: list[float]


@dataclass(frozen=True, eq=False)
class Classifier:
    """A scorer f: R^d -> R.

    Parameter layout: linear is ``[w (d), b]``; the MLP is
    ``[W1 (h*d, row-major), b1 (h), w2 (h), b2]`` with a tanh hidden layer.
    """

    architecture: Architecture
    parameters: FloatArray

    def __post_init__(self) -> None:
        parameters = np.array(self.parameters, dtype=np.float64, copy=True)
        if parameters.shape != (self.architecture.parameter_count,):
            raise DimensionMismatchError(
                f"{self.architecture.kind} needs {self.architecture.parameter_count} parameters, "
                f"got shape {parameters.shape}"
            )
        if not np.isfinite(parameters).all():
            raise NonFiniteError("classifier parameters must be finite")
        parameters.setflags(write=False)
        object.__setattr__(self, "parameters", parameters)

    @classmethod
    def zeros(cls, architecture: Architecture) -> "Classifier":
        return cls(architecture, np.zeros(architecture.parameter_count))

    @classmethod
    def initialize(cls, architecture: Architecture, rng: np.random.Generator) -> "Classifier":
        """Uniform fan-in initialization with zero biases.

        Hidden (or linear) weights are drawn from U(-1/sqrt(d), 1/sqrt(d)),
        output weights from U(-1/sqrt(h), 1/sqrt(h)).
        """
        d, h = architecture.input_dim, architecture.hidden
        input_bound = 1.0 / np.sqrt(d)
        if architecture.kind is ArchitectureKind.LINEAR:
            weights = rng.uniform(-input_bound, input_bound, size=d)
            return cls(architecture, np.concatenate([weights, [0.0]]))
        hidden_weights = rng.uniform(-input_bound, input_bound, size=h * d)
        output_bound = 1.0 / np.sqrt(h)
        output_weights = rng.uniform(-output_bound, output_bound, size=h)
        return cls(
            architecture,
            np.concatenate([hidden_weights, np.zeros(h), output_weights, [0.0]]),
        )

    @classmethod
    def linear_from(cls, weights: npt.ArrayLike, bias: float) -> "Classifier":
        weights = np.asarray(weights, dtype=np.float64)
        return cls(Architecture.linear(weights.size), np.concatenate([weights, [bias]]))

    @classmethod
    def from_snapshot(cls, snapshot: ClassifierSnapshot) -> "Classifier":
        return cls(snapshot.architecture, np.asarray(snapshot.parameters))

    def snapshot(self) -> ClassifierSnapshot:
        return ClassifierSnapshot(architecture=self.architecture, parameters=self.parameters.tolist())

    def with_parameters(self, parameters: npt.ArrayLike) -> "Classifier":
        return replace(self, parameters=np.asarray(parameters, dtype=np.float64))

    def _mlp_blocks(self) -> tuple[FloatArray, FloatArray, FloatArray, float]:
        d, h = self.architecture.input_dim, self.architecture.hidden
        p = self.parameters
        hidden_weights = p[: h * d].reshape(h, d)
        hidden_bias = p[h * d : h * d + h]
        output_weights = p[h * d + h : h * d + 2 * h]
        return hidden_weights, hidden_bias, output_weights, float(p[-1])

    def _check_inputs(self, features: FloatArray) -> FloatArray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.architecture.input_dim:
            raise DimensionMismatchError(
                f"classifier expects d={self.architecture.input_dim}, got features of shape "
                f"{features.shape}"
            )
        return features

    def _forward(self, features: FloatArray) -> tuple[FloatArray, FloatArray | None]:
        if self.architecture.kind is ArchitectureKind.LINEAR:
            return features @ self.parameters[:-1] + self.parameters[-1], None
        hidden_weights, hidden_bias, output_weights, output_bias = self._mlp_blocks()
        activations = np.tanh(features @ hidden_weights.T + hidden_bias)
        return activations @ output_weights + output_bias, activations

    def score(self, features: FloatArray) -> FloatArray:
        scores, _ = self._forward(self._check_inputs(features))
        if not np.isfinite(scores).all():
            raise NonFiniteError("classifier produced non-finite scores")
        return scores


def score_batch(classifier: Classifier, features: FloatArray) -> FloatArray:
    """Scores f(x) for every row of ``features``."""
    return classifier.score(features)


def weighted_loss_and_grad(
    classifier: Classifier,
    features: FloatArray,
    signs: npt.ArrayLike,
    weights: npt.ArrayLike,
    loss: SurrogateLoss,
) -> tuple[float, FloatArray]:
    """Value and parameter gradient of sum_i weights_i * l(f(x_i), signs_i).

    Weights may be negative. Weight decay is not part of the value; the
    optimizer applies it.

    Raises:
        DimensionMismatchError: If the inputs disagree in length or width.
        NonFiniteError: If the value or the gradient is not finite.
    """
    features = classifier._check_inputs(features)
    signs = np.asarray(signs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    m = features.shape[0]
    if signs.shape != (m,) or weights.shape != (m,):
        raise DimensionMismatchError(
            f"{m} rows but signs have shape {signs.shape} and weights {weights.shape}"
        )
    scores, activations = classifier._forward(features)
    value = float(weights @ loss.value(scores, signs))
    upstream = weights * loss.derivative(scores, signs)

    if activations is None:
        grad = np.concatenate([features.T @ upstream, [upstream.sum()]])
    else:
        _, _, output_weights, _ = classifier._mlp_blocks()
        pre_activation = np.outer(upstream, output_weights) * (1.0 - activations**2)
        grad = np.concatenate(
            [
                (pre_activation.T @ features).ravel(),
                pre_activation.sum(axis=0),
                activations.T @ upstream,
                [upstream.sum()],
            ]
        )
    if not (np.isfinite(value) and np.isfinite(grad).all()):
        raise NonFiniteError("weighted loss or its gradient is not finite")
    return value, grad


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """SGD with heavy-ball momentum and decoupled-from-loss weight decay."""

    learning_rate: float
    momentum: float
    weight_decay: float
    velocity: FloatArray

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise InvalidSpecError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise InvalidSpecError(f"momentum must lie in [0, 1), got {self.momentum}")
        if not self.weight_decay >= 0:
            raise InvalidSpecError(f"weight decay must be non-negative, got {self.weight_decay}")
        velocity = np.array(self.velocity, dtype=np.float64, copy=True)
        velocity.setflags(write=False)
        object.__setattr__(self, "velocity", velocity)

    @classmethod
    def create(
        cls,
        parameter_count: int,
        learning_rate: float,
        momentum: float = 0.9,
        weight_decay: float = 0.0,
    ) -> "OptimizerState":
        return cls(learning_rate, momentum, weight_decay, np.zeros(parameter_count))


def sgd_step(
    classifier: Classifier, grad: FloatArray, opt: OptimizerState
) -> tuple[Classifier, OptimizerState]:
    """One momentum step.

    velocity <- momentum * velocity + grad + weight_decay * parameters
    parameters <- parameters - learning_rate * velocity

    Raises:
        NonFiniteError: If the update is not finite.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != classifier.parameters.shape or opt.velocity.shape != grad.shape:
        raise DimensionMismatchError(
            f"gradient {grad.shape}, velocity {opt.velocity.shape}, "
            f"parameters {classifier.parameters.shape}"
        )
    velocity = opt.momentum * opt.velocity + grad + opt.weight_decay * classifier.parameters
    parameters = classifier.parameters - opt.learning_rate * velocity
    if not (np.isfinite(velocity).all() and np.isfinite(parameters).all()):
        raise NonFiniteError("SGD update is not finite")
    return classifier.with_parameters(parameters), replace(opt, velocity=velocity)


def finite_diff_check(
    classifier: Classifier,
    features: FloatArray,
    signs: npt.ArrayLike,
    weights: npt.ArrayLike,
    loss: SurrogateLoss,
    h: float = 1e-5,
) -> float:
    """Largest relative gap between the analytic and central-difference gradients.

    Per coordinate the gap is |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    if not h > 0:
        raise InvalidSpecError(f"step must be positive, got {h}")
    _, analytic = weighted_loss_and_grad(classifier, features, signs, weights, loss)
    base = classifier.parameters
    numeric = np.empty_like(analytic)
    for j in range(base.size):
        step = np.zeros_like(base)
        step[j] = h
        plus, _ = weighted_loss_and_grad(classifier.with_parameters(base + step), features, signs, weights, loss)
        minus, _ = weighted_loss_and_grad(classifier.with_parameters(base - step), features, signs, weights, loss)
        numeric[j] = (plus - minus) / (2 * h)
    denominator = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denominator))
