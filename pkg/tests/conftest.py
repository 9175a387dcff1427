"""Pytest fixtures and configuration for pubench tests."""

from pathlib import Path

import numpy as np
import pytest

from pubench.data import GaussianMixtureSpec, PuDataset, make_os_pu, make_ts_pu
from pubench.model import Architecture, Classifier, LossKind, SurrogateLoss

SMALL_CONFIG = """\
# tiny OS benchmark
seed = 3
setting = OS
pi = 0.5
c = 0.5
n = 600
dataset.n_test = 400
algo = upu, upu-c
loss = sigmoid
model = linear
iterations = 60
eval_every = 20
splits = 2
draws = 2
criteria = pa, pauc
metrics = acc, auc
"""


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def mixture() -> GaussianMixtureSpec:
    """Return a 2-D mixture with means at +/-1.4 e1 and pi = 0.5."""
    return GaussianMixtureSpec.symmetric(dim=2, separation=1.4, prior=0.5)


@pytest.fixture
def ts_pu(mixture: GaussianMixtureSpec, rng: np.random.Generator) -> PuDataset:
    """Return a small two-sample PU dataset with oracle labels."""
    return make_ts_pu(mixture, 50, 200, rng)


@pytest.fixture
def os_pu(mixture: GaussianMixtureSpec, rng: np.random.Generator) -> PuDataset:
    """Return a small one-sample PU dataset (c = 0.5) with oracle labels."""
    return make_os_pu(mixture, 400, 0.5, rng)


@pytest.fixture
def mlp(rng: np.random.Generator) -> Classifier:
    """Return a randomly initialized 2-8-1 tanh MLP."""
    return Classifier.initialize(Architecture.mlp(2, 8), rng)


@pytest.fixture
def logistic() -> SurrogateLoss:
    """Return the logistic loss."""
    return SurrogateLoss(LossKind.LOGISTIC)


@pytest.fixture
def sigmoid() -> SurrogateLoss:
    """Return the sigmoid loss."""
    return SurrogateLoss(LossKind.SIGMOID)


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Write a tiny experiment config and return its path."""
    path = tmp_path / "bench.cfg"
    path.write_text(SMALL_CONFIG + f"out = {tmp_path / 'out'}\n", encoding="utf-8")
    return path


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Clear the pubench environment overrides."""
    monkeypatch.delenv("PUBENCH_WORKERS", raising=False)
    monkeypatch.delenv("PUBENCH_LOG_LEVEL", raising=False)
