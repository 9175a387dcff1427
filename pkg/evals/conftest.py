"""Shared fixtures for the acceptance evaluations.

Every evaluation uses the same desk-scale mixture: two unit-scale Gaussians
in two dimensions with means at +/-1.4 along the first axis and prior 0.5.
"""

import numpy as np
import pytest

from pubench.data import GaussianMixtureSpec
from pubench.model import Classifier, LossKind, SurrogateLoss


@pytest.fixture
def mixture() -> GaussianMixtureSpec:
    """Return the shared desk-scale mixture."""
    return GaussianMixtureSpec.symmetric(2, 1.4, 0.5)


@pytest.fixture
def frozen_classifier() -> Classifier:
    """A fixed linear scorer whose class losses differ under the sigmoid loss."""
    return Classifier.linear_from([0.8, -0.3], 0.4)


@pytest.fixture
def sigmoid() -> SurrogateLoss:
    """Return the bounded sigmoid loss used by the risk evaluations."""
    return SurrogateLoss(LossKind.SIGMOID)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a generator with a fixed seed so evaluations are repeatable."""
    return np.random.default_rng(20240611)
