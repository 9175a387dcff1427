"""Tests for pubench.metrics module."""

from fractions import Fraction

import numpy as np
import pytest
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score

from pubench.errors import DimensionMismatchError, InvalidSpecError
from pubench.metrics import (
    ConfusionCounts,
    Metric,
    accuracy,
    auc,
    confusion,
    evaluate_metrics,
    f1,
    pairwise_auc,
    precision,
    recall,
)


class TestConfusion:
    """Tests for confusion function."""

    def test_counts_with_ties_at_threshold(self) -> None:
        """Test that a score equal to the threshold is predicted positive."""
        counts = confusion([0.0, -0.1, 0.5, -2.0], [1, 1, -1, -1])

        assert counts == ConfusionCounts(tp=1, fp=1, tn=1, fn=1)
        assert counts.n == 4

    def test_shape_mismatch(self) -> None:
        """Test that scores and labels must align."""
        with pytest.raises(DimensionMismatchError):
            confusion([0.1, 0.2], [1])


class TestCountMetrics:
    """Tests for accuracy, precision, recall and F1."""

    def test_values(self) -> None:
        """Test the ratios on a small table."""
        counts = ConfusionCounts(tp=3, fp=1, tn=4, fn=2)

        assert accuracy(counts).value == pytest.approx(0.7)
        assert precision(counts).value == pytest.approx(0.75)
        assert recall(counts).value == pytest.approx(0.6)
        assert f1(counts).value == pytest.approx(6 / 9)

    def test_no_predicted_positives_is_degenerate(self) -> None:
        """Test that an empty denominator yields 0 flagged degenerate."""
        counts = ConfusionCounts(tp=0, fp=0, tn=5, fn=3)

        assert precision(counts) == (0.0, True)
        assert f1(counts) == (0.0, True)
        assert recall(counts) == (0.0, False)

    def test_matches_sklearn(self, rng: np.random.Generator) -> None:
        """Test accuracy and F1 against scikit-learn."""
        scores = rng.standard_normal(300)
        labels = np.where(rng.random(300) < 0.4, 1, -1)
        predicted = np.where(scores >= 0.0, 1, -1)
        counts = confusion(scores, labels)

        assert accuracy(counts).value == pytest.approx(accuracy_score(labels, predicted))
        assert f1(counts).value == pytest.approx(f1_score(labels, predicted, pos_label=1))

    def test_f1_matches_exact_harmonic_mean(self, rng: np.random.Generator) -> None:
        """Test F1 against the harmonic mean of precision and recall in exact arithmetic."""
        for _ in range(20):
            m = int(rng.integers(5, 60))
            scores = rng.integers(-3, 4, size=m).astype(float)
            labels = rng.choice([-1, 1], size=m)
            labels[0], scores[0] = 1, 1.0
            pairs = list(zip(scores.tolist(), labels.tolist(), strict=True))
            tp = sum(1 for s, y in pairs if s >= 0 and y == 1)
            exact_precision = Fraction(tp, sum(1 for s, _ in pairs if s >= 0))
            exact_recall = Fraction(tp, sum(1 for _, y in pairs if y == 1))
            expected = 2 * exact_precision * exact_recall / (exact_precision + exact_recall)

            assert f1(confusion(scores, labels)).value == pytest.approx(float(expected), rel=1e-15)

    def test_negative_counts_rejected(self) -> None:
        """Test that counts must be non-negative."""
        with pytest.raises(InvalidSpecError):
            ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


class TestAuc:
    """Tests for auc and pairwise_auc."""

    def test_perfect_and_reversed(self) -> None:
        """Test the extreme rankings."""
        labels = [1, 1, -1, -1]

        assert auc([4.0, 3.0, 2.0, 1.0], labels) == 1.0
        assert auc([1.0, 2.0, 3.0, 4.0], labels) == 0.0

    def test_all_tied(self) -> None:
        """Test that a constant scorer has AUC 1/2."""
        assert auc(np.zeros(6), [1, -1, 1, -1, -1, 1]) == 0.5

    def test_matches_pairwise_with_ties(self, rng: np.random.Generator) -> None:
        """Test midrank AUC against the pairwise definition on heavily tied scores."""
        scores = rng.integers(0, 5, 200).astype(float)
        labels = np.where(rng.random(200) < 0.3, 1, -1)

        assert auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels), abs=1e-12)

    def test_matches_sklearn(self, rng: np.random.Generator) -> None:
        """Test AUC against scikit-learn."""
        scores = rng.standard_normal(500)
        labels = np.where(rng.random(500) < 0.5, 1, -1)

        assert auc(scores, labels) == pytest.approx(roc_auc_score(labels, scores))

    def test_single_class(self) -> None:
        """Test that AUC without negatives is rejected."""
        with pytest.raises(InvalidSpecError):
            auc([0.1, 0.2], [1, 1])
        with pytest.raises(InvalidSpecError):
            pairwise_auc([0.1, 0.2], [-1, -1])


class TestEvaluateMetrics:
    """Tests for evaluate_metrics function."""

    def test_requested_order_and_names(self) -> None:
        """Test that metrics come back keyed by token in the requested order."""
        values = evaluate_metrics(
            [2.0, 1.0, -1.0], [1, -1, -1], [Metric.RECALL, Metric.AUC, Metric.ACC]
        )

        assert list(values) == ["recall", "auc", "acc"]
        assert values["recall"] == 1.0
        assert values["auc"] == 1.0
        assert values["acc"] == pytest.approx(2 / 3)

    def test_threshold(self) -> None:
        """Test that the threshold moves the decision."""
        values = evaluate_metrics([2.0, 1.0, -1.0], [1, -1, -1], [Metric.ACC], threshold=1.5)

        assert values["acc"] == 1.0
