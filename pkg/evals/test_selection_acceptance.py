"""Acceptance evaluations for the PU-only validation criteria.

On a large validation sample, PA - pi must recover the true accuracy and the
affine map of PAUC must recover the true AUC, for random linear classifiers
whose exact accuracy and AUC are known in closed form.

Run with: uv run pytest evals/test_selection_acceptance.py -v
"""

import numpy as np
import pytest

from pubench.data import GaussianMixtureSpec, PuDataset, Setting, make_os_pu, make_ts_pu
from pubench.model import Classifier
from pubench.selection import pa_to_acc, pauc_to_auc, proxy_accuracy, proxy_auc

VALIDATION_POSITIVES = 50_000
N_CLASSIFIERS = 5
OS_C = 0.5


def _validation_set(
    setting: Setting, spec: GaussianMixtureSpec, rng: np.random.Generator
) -> PuDataset:
    if setting is Setting.TS:
        return make_ts_pu(spec, VALIDATION_POSITIVES, VALIDATION_POSITIVES, rng)
    # Sized so that D'_P holds about VALIDATION_POSITIVES rows.
    n = int(VALIDATION_POSITIVES / (OS_C * spec.prior))
    return make_os_pu(spec, n, OS_C, rng)


def _random_linear(rng: np.random.Generator) -> tuple[np.ndarray, float]:
    return rng.normal(size=2), float(rng.normal(scale=0.5))


@pytest.mark.parametrize("setting", [Setting.TS, Setting.OS])
class TestProxyIdentities:
    """Evaluation of PA and PAUC against closed-form ACC and AUC."""

    def test_proxy_accuracy_recovers_accuracy(
        self, setting: Setting, mixture: GaussianMixtureSpec, rng: np.random.Generator
    ) -> None:
        """Test that PA - pi is within 0.01 of the true accuracy."""
        val = _validation_set(setting, mixture, rng)

        for _ in range(N_CLASSIFIERS):
            weights, bias = _random_linear(rng)
            pa = proxy_accuracy(Classifier.linear_from(weights, bias), val)

            assert pa_to_acc(pa, mixture.prior) == pytest.approx(
                mixture.linear_accuracy(weights, bias), abs=0.01
            )

    def test_proxy_auc_recovers_auc(
        self, setting: Setting, mixture: GaussianMixtureSpec, rng: np.random.Generator
    ) -> None:
        """Test that PAUC mapped with the unlabeled prior is within 0.01 of the true AUC."""
        val = _validation_set(setting, mixture, rng)
        expected_prior = mixture.prior if setting is Setting.TS else 1 / 3

        assert val.unlabeled_prior == pytest.approx(expected_prior)
        for _ in range(N_CLASSIFIERS):
            weights, bias = _random_linear(rng)
            pauc = proxy_auc(Classifier.linear_from(weights, bias), val)

            assert pauc_to_auc(pauc, val.unlabeled_prior) == pytest.approx(
                mixture.linear_auc(weights), abs=0.01
            )
