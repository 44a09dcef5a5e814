"""Confusion matrix, precision/recall/F-measure, ROC curve and AUC.

Every function takes the positive class explicitly. The published test-set
counts only reproduce the published precision and recall when the
non-churner (label 0) is treated as the positive class.
"""

import logging
from typing import Sequence

import numpy as np

from src.exceptions import MetricError, UndefinedRocError
from src.models import ConfusionMatrix, EvalReport, EvaluationSummary, RocCurve, ScalarMetrics

logger = logging.getLogger(__name__)

# Published test-set counts, non-churner as the positive class.
REFERENCE_MATRIX = ConfusionMatrix(tp=4841, fp=112, fn=9, tn=38, positive_class=0)

# Published headline figures, in percent (AUC as a fraction).
REFERENCE_TABLE = {
    "accuracy": 97.53,
    "precision": 97.7,
    "recall": 99.8,
    "f_measure": 98.8,
    "auc": 0.89,
}


def _binary(name: str, values: Sequence[int]) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1:
        raise MetricError(f"{name} must be a 1-D vector")
    if not np.all((array == 0) | (array == 1)):
        raise MetricError(f"{name} must contain only 0 and 1")
    return array.astype(np.int64)


def check_threshold(threshold: float) -> float:
    """Return `threshold` if it lies strictly between 0 and 1."""
    if not 0.0 < threshold < 1.0:
        raise MetricError(f"threshold must lie in (0, 1), got {threshold}")
    return threshold


def _check_lengths(*arrays: np.ndarray) -> None:
    lengths = {len(a) for a in arrays}
    if len(lengths) != 1:
        raise MetricError(f"length mismatch: {sorted(lengths)}")
    if lengths == {0}:
        raise MetricError("metrics need at least one row")


def confusion(labels: Sequence[int], predictions: Sequence[int], positive_class: int = 1) -> ConfusionMatrix:
    """Count tp/fp/fn/tn with `positive_class` as the positive label."""
    y = _binary("labels", labels)
    y_hat = _binary("predictions", predictions)
    _check_lengths(y, y_hat)
    actual = y == positive_class
    predicted = y_hat == positive_class
    return ConfusionMatrix(
        tp=int(np.sum(actual & predicted)),
        fp=int(np.sum(~actual & predicted)),
        fn=int(np.sum(actual & ~predicted)),
        tn=int(np.sum(~actual & ~predicted)),
        positive_class=positive_class,
    )


def scalar_metrics(matrix: ConfusionMatrix) -> ScalarMetrics:
    """Accuracy, precision, recall and F-measure.

    A zero precision or recall denominator yields 0.0 and sets the matching
    degenerate flag; F is 0.0 when precision + recall is 0.
    """
    if matrix.total == 0:
        raise MetricError("empty confusion matrix")
    accuracy = (matrix.tp + matrix.tn) / matrix.total

    precision_degenerate = matrix.tp + matrix.fp == 0
    precision = 0.0 if precision_degenerate else matrix.tp / (matrix.tp + matrix.fp)
    recall_degenerate = matrix.tp + matrix.fn == 0
    recall = 0.0 if recall_degenerate else matrix.tp / (matrix.tp + matrix.fn)
    f_measure = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    return ScalarMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f_measure=f_measure,
        precision_degenerate=precision_degenerate,
        recall_degenerate=recall_degenerate,
    )


def roc_curve(scores: Sequence[float], labels: Sequence[int], positive_class: int = 1) -> RocCurve:
    """ROC points with one step per distinct score, and the trapezoidal AUC.

    Higher scores indicate `positive_class`. Tied scores form a single step, so
    the area equals P(s+ > s-) + 0.5 * P(s+ = s-).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = _binary("labels", labels)
    _check_lengths(s, y)
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    positive = y == positive_class
    n_pos = int(positive.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedRocError("undefined ROC: labels contain a single class")

    order = np.argsort(-s, kind="mergesort")
    ranked = s[order]
    hits = positive[order]
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    group_ends = np.append(np.flatnonzero(np.diff(ranked) != 0), len(ranked) - 1)

    tps = np.concatenate([[0], tp[group_ends]]).astype(np.int64)
    fps = np.concatenate([[0], fp[group_ends]]).astype(np.int64)
    points = [(float(f) / n_neg, float(t) / n_pos) for f, t in zip(fps, tps)]
    # twice the area in count units, exact in integers
    doubled = int(np.sum((fps[1:] - fps[:-1]) * (tps[1:] + tps[:-1])))
    return RocCurve(points=points, auc=doubled / (2 * n_pos * n_neg))


def pair_count_auc(scores: Sequence[float], labels: Sequence[int], positive_class: int = 1) -> float:
    """AUC by counting concordant and tied positive/negative pairs."""
    s = np.asarray(scores, dtype=np.float64)
    y = _binary("labels", labels)
    _check_lengths(s, y)
    positive = y == positive_class
    s_pos, s_neg = s[positive], s[~positive]
    if s_pos.size == 0 or s_neg.size == 0:
        raise UndefinedRocError("undefined ROC: labels contain a single class")
    greater = int(np.sum(s_pos[:, np.newaxis] > s_neg[np.newaxis, :]))
    ties = int(np.sum(s_pos[:, np.newaxis] == s_neg[np.newaxis, :]))
    return (2 * greater + ties) / (2 * s_pos.size * s_neg.size)


def eval_report(
    scores: Sequence[float],
    labels: Sequence[int],
    predictions: Sequence[int],
    positive_class: int,
) -> EvalReport:
    """Confusion matrix, scalar metrics and ROC for one orientation."""
    matrix = confusion(labels, predictions, positive_class)
    scalars = scalar_metrics(matrix)
    return EvalReport(
        matrix=matrix,
        roc=roc_curve(scores, labels, positive_class),
        **scalars.model_dump(),
    )


def evaluate_scores(probabilities: Sequence[float], labels: Sequence[int], threshold: float) -> EvaluationSummary:
    """Report churn probabilities against labels in both orientations.

    The non-churn orientation ranks rows by the negated churn probability,
    which keeps the ordering exact.
    """
    check_threshold(threshold)
    p = np.asarray(probabilities, dtype=np.float64)
    y = _binary("labels", labels)
    _check_lengths(p, y)
    predictions = (p >= threshold).astype(np.int64)
    n_pos = int(y.sum())
    summary = EvaluationSummary(
        threshold=threshold,
        n_rows=len(y),
        baseline_accuracy=max(n_pos, len(y) - n_pos) / len(y),
        churn_positive=eval_report(p, y, predictions, positive_class=1),
        non_churn_positive=eval_report(-p, y, predictions, positive_class=0),
    )
    logger.info(
        "Evaluated %d rows at threshold %.3f: accuracy=%.4f auc=%.4f (baseline %.4f)",
        summary.n_rows, threshold, summary.churn_positive.accuracy,
        summary.churn_positive.roc.auc, summary.baseline_accuracy,
    )
    return summary
