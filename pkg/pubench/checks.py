"""Property checks behind ``pubench check``.

Each check draws its own data from a fixed seed and compares an operation
against an independent oracle: a closed form, a brute-force evaluation or a
Monte-Carlo estimate with a 3-standard-error tolerance. ``fast`` shrinks
sample sizes (and widens the fixed tolerances accordingly) for a quick
smoke run.
"""

import logging
import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from .data import (
    GaussianMixtureSpec,
    estimate_label_frequency,
    make_os_pu,
    make_ts_pu,
    os_prior,
)
from .metrics import auc, pairwise_auc
from .model import Architecture, Classifier, LossKind, SurrogateLoss, finite_diff_check
from .risk import (
    RiskBatch,
    calibrated_risk,
    expected_bias_oracle,
    monte_carlo_risk,
    nnpu_risk,
    pusb_threshold,
    replenish_batch,
    upu_risk,
)
from .selection import pa_to_acc, pauc_to_auc, proxy_accuracy, proxy_auc

logger = logging.getLogger(__name__)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


Check = Callable[[np.random.Generator, bool], CheckResult]

_CHECKS: list[tuple[str, Check]] = []


def _check(name: str) -> Callable[[Check], Check]:
    def decorator(fn: Check) -> Check:
        _CHECKS.append((name, fn))
        return fn

    return decorator


def _mixture(prior: float = 0.5) -> GaussianMixtureSpec:
    return GaussianMixtureSpec.symmetric(2, 1.4, prior)


@_check("os-unlabeled-prior")
def _os_unlabeled_prior(rng: np.random.Generator, fast: bool) -> CheckResult:
    n = 20_000 if fast else 200_000
    pu = make_os_pu(_mixture(0.5), n, 0.4, rng)
    assert pu.oracle_unlabeled_labels is not None
    observed = float(np.mean(pu.oracle_unlabeled_labels == 1))
    expected = os_prior(0.5, 0.4)
    se = math.sqrt(expected * (1 - expected) / pu.n_u)
    return CheckResult("", abs(observed - expected) <= 3 * se, f"{observed:.4f} vs {expected:.4f}")


@_check("label-frequency-estimate")
def _label_frequency(rng: np.random.Generator, fast: bool) -> CheckResult:
    n = 20_000 if fast else 200_000
    pu = make_os_pu(_mixture(0.3), n, 0.6, rng)
    estimate = estimate_label_frequency(pu.n_p, pu.n_u, 0.3).raw
    # n_P ~ Binomial(n, c pi), so c_hat has sd sqrt(c pi (1 - c pi) / n) / pi.
    se = math.sqrt(0.18 * 0.82 / n) / 0.3
    return CheckResult("", abs(estimate - 0.6) <= 3 * se, f"{estimate:.4f} vs 0.6")


def _random_batch(rng: np.random.Generator, dim: int) -> tuple[np.ndarray, np.ndarray, float]:
    p = int(rng.integers(1, 40))
    u = int(rng.integers(1, 120))
    prior = float(rng.uniform(0.05, 0.95))
    return rng.normal(size=(p, dim)), rng.normal(size=(u, dim)), prior


def _random_classifier(rng: np.random.Generator, dim: int) -> Classifier:
    if rng.random() < 0.5:
        return Classifier.initialize(Architecture.linear(dim), rng)
    return Classifier.initialize(Architecture.mlp(dim, 8), rng)


@_check("calibrated-equals-replenished")
def _equivalence(rng: np.random.Generator, fast: bool) -> CheckResult:
    worst = 0.0
    for _ in range(20 if fast else 100):
        dim = int(rng.integers(1, 6))
        positives, unlabeled, prior = _random_batch(rng, dim)
        classifier = _random_classifier(rng, dim)
        loss = SurrogateLoss(rng.choice(list(LossKind)))
        c = estimate_label_frequency(len(positives), len(unlabeled), prior).raw
        direct = calibrated_risk(RiskBatch(positives, unlabeled, prior, c), classifier, loss).total
        replenished = upu_risk(
            RiskBatch(positives, replenish_batch(positives, unlabeled), prior), classifier, loss
        ).total
        worst = max(worst, abs(direct - replenished) / (1 + abs(direct)))
    return CheckResult("", worst <= 1e-9, f"max rel diff {worst:.2e}")


@_check("gradient-finite-differences")
def _gradients(rng: np.random.Generator, fast: bool) -> CheckResult:
    worst_mlp = 0.0
    worst_linear = 0.0
    for _ in range(5 if fast else 20):
        features = rng.normal(size=(6, 4))
        signs = rng.choice([-1.0, 1.0], size=6)
        weights = rng.normal(size=6)
        mlp = Classifier.initialize(Architecture.mlp(4, 8), rng)
        linear = Classifier.initialize(Architecture.linear(4), rng)
        worst_mlp = max(
            worst_mlp,
            finite_diff_check(mlp, features, signs, weights, SurrogateLoss(LossKind.LOGISTIC)),
        )
        worst_linear = max(
            worst_linear,
            finite_diff_check(linear, features, signs, weights, SurrogateLoss(LossKind.SQUARED)),
        )
    passed = worst_mlp <= 1e-4 and worst_linear <= 1e-7
    return CheckResult("", passed, f"mlp {worst_mlp:.1e}, linear {worst_linear:.1e}")


@_check("auc-midrank-vs-pairwise")
def _auc(rng: np.random.Generator, fast: bool) -> CheckResult:
    mismatches = 0
    for _ in range(10 if fast else 50):
        m = int(rng.integers(2, 200))
        scores = rng.integers(0, 12, size=m).astype(float)
        labels = rng.choice([-1, 1], size=m)
        labels[0], labels[1] = 1, -1
        mismatches += auc(scores, labels) != pairwise_auc(scores, labels)
    return CheckResult("", mismatches == 0, f"{mismatches} mismatches")


@_check("nnpu-dominates-upu")
def _nnpu_dominance(rng: np.random.Generator, fast: bool) -> CheckResult:
    violations = 0
    for _ in range(50 if fast else 500):
        dim = int(rng.integers(1, 4))
        positives, unlabeled, prior = _random_batch(rng, dim)
        batch = RiskBatch(positives, unlabeled, prior)
        classifier = _random_classifier(rng, dim)
        loss = SurrogateLoss(LossKind.SIGMOID)
        upu = upu_risk(batch, classifier, loss)
        nnpu, corrected = nnpu_risk(batch, classifier, loss)
        # Equal totals exactly when no correction happened.
        violations += nnpu.total < upu.total or (nnpu.total > upu.total) != corrected
    return CheckResult("", violations == 0, f"{violations} violations")


@_check("pusb-positive-count")
def _pusb(rng: np.random.Generator, fast: bool) -> CheckResult:
    violations = 0
    for _ in range(20 if fast else 200):
        m = int(rng.integers(1, 1000))
        prior = float(rng.uniform(0.01, 0.99))
        scores = np.round(rng.normal(size=m), 1)
        threshold = pusb_threshold(scores, prior)
        k = math.floor(prior * m)
        positives = int(np.sum(scores >= threshold))
        ties = int(np.sum(scores == threshold))
        violations += not k <= positives <= k + ties
    return CheckResult("", violations == 0, f"{violations} violations")


_OS_LABEL_FREQUENCY = 0.5


def _frozen_classifier() -> Classifier:
    return Classifier.linear_from([0.8, -0.3], 0.4)


def _resampled_risk(
    rng: np.random.Generator,
    fast: bool,
    setting: str,
    calibrated: bool,
) -> tuple[float, float, float, float]:
    spec = _mixture(0.5)
    classifier = _frozen_classifier()
    loss = SurrogateLoss(LossKind.SIGMOID)
    resamples = 200 if fast else 2000
    estimates = []
    for _ in range(resamples):
        if setting == "TS":
            pu = make_ts_pu(spec, 100, 400, rng)
            batch = RiskBatch(pu.positives, pu.unlabeled, spec.prior)
        else:
            pu = make_os_pu(spec, 500, _OS_LABEL_FREQUENCY, rng)
            batch = RiskBatch(pu.positives, pu.unlabeled, spec.prior, _OS_LABEL_FREQUENCY)
        value = calibrated_risk(batch, classifier, loss) if calibrated else upu_risk(
            batch, classifier, loss
        )
        estimates.append(value.total)
    truth = monte_carlo_risk(spec, classifier, loss, 100_000 if fast else 1_000_000, rng)
    mean = float(np.mean(estimates))
    se = float(np.std(estimates, ddof=1) / math.sqrt(resamples))
    return mean, se, truth.value, truth.stderr


@_check("upu-unbiased-ts")
def _upu_unbiased(rng: np.random.Generator, fast: bool) -> CheckResult:
    mean, se, truth, truth_se = _resampled_risk(rng, fast, "TS", calibrated=False)
    tolerance = 3 * math.hypot(se, truth_se)
    return CheckResult("", abs(mean - truth) <= tolerance, f"{mean:.4f} vs {truth:.4f}")


@_check("calibrated-unbiased-os")
def _calibrated_unbiased(rng: np.random.Generator, fast: bool) -> CheckResult:
    mean, se, truth, truth_se = _resampled_risk(rng, fast, "OS", calibrated=True)
    tolerance = 3 * math.hypot(se, truth_se)
    return CheckResult("", abs(mean - truth) <= tolerance, f"{mean:.4f} vs {truth:.4f}")


@_check("upu-biased-os")
def _upu_biased(rng: np.random.Generator, fast: bool) -> CheckResult:
    """uPU on OS data misses the true risk by the closed-form bias, and the miss is real."""
    mean, se, truth, truth_se = _resampled_risk(rng, fast, "OS", calibrated=False)
    oracle = expected_bias_oracle(
        _mixture(0.5),
        _frozen_classifier(),
        SurrogateLoss(LossKind.SIGMOID),
        _OS_LABEL_FREQUENCY,
        100_000 if fast else 1_000_000,
        rng,
    )
    bias = mean - truth
    matches = abs(bias - oracle.value) <= 3 * math.hypot(se, truth_se, oracle.stderr)
    detectable = abs(bias) >= 3 * math.hypot(se, truth_se)
    return CheckResult(
        "", matches and detectable, f"bias {bias:.4f} vs expected {oracle.value:.4f}"
    )


@_check("proxy-criteria-identities")
def _proxy_identities(rng: np.random.Generator, fast: bool) -> CheckResult:
    spec = GaussianMixtureSpec.symmetric(2, 1.0, 0.3)
    n = 5_000 if fast else 50_000
    tolerance = 0.03 if fast else 0.01
    worst = 0.0
    for setting in ("TS", "OS"):
        if setting == "TS":
            val = make_ts_pu(spec, n, n, rng)
        else:
            val = make_os_pu(spec, 4 * n, 0.5, rng)
        for _ in range(3):
            weights = rng.normal(size=2)
            bias = float(rng.normal(scale=0.5))
            classifier = Classifier.linear_from(weights, bias)
            acc_gap = abs(
                pa_to_acc(proxy_accuracy(classifier, val), spec.prior)
                - spec.linear_accuracy(weights, bias)
            )
            auc_gap = abs(
                pauc_to_auc(proxy_auc(classifier, val), val.unlabeled_prior)
                - spec.linear_auc(weights)
            )
            worst = max(worst, acc_gap, auc_gap)
    return CheckResult("", worst <= tolerance, f"max gap {worst:.4f}")


def run_checks(fast: bool = False, seed: int = 0) -> list[CheckResult]:
    """Run every registered check, each on its own child seed.

    A check that raises counts as failed with the exception as detail.
    """
    results = []
    children = np.random.SeedSequence(seed).spawn(len(_CHECKS))
    for (name, check), child in zip(_CHECKS, children, strict=True):
        try:
            outcome = check(np.random.default_rng(child), fast)
            results.append(outcome._replace(name=name))
        except Exception as e:  # noqa: BLE001
            logger.exception("Check %s raised", name)
            results.append(CheckResult(name, False, f"{type(e).__name__}: {e}"))
    return results
