"""Detection metrics: F1, Matthews correlation, precision at a budget.

All metrics take boolean flag vectors (predicted) against boolean truth
vectors (which nodes were actually mislabelled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int


def confusion(predicted: np.ndarray, actual: np.ndarray) -> ConfusionCounts:
    predicted = np.asarray(predicted, dtype=bool)
    actual = np.asarray(actual, dtype=bool)
    if predicted.shape != actual.shape:
        raise DataError("flag vectors differ in length")
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def f1_score(predicted: np.ndarray, actual: np.ndarray) -> tuple[float, bool]:
    """F1 = 2TP / (2TP + FP + FN). Returns (value, degenerate).

    A zero denominator (no positives anywhere) yields 0.0 with the
    degenerate flag set rather than an exception.
    """
    m = confusion(predicted, actual)
    denom = 2 * m.tp + m.fp + m.fn
    if denom == 0:
        return 0.0, True
    return 2.0 * m.tp / denom, False


def mcc(predicted: np.ndarray, actual: np.ndarray) -> tuple[float, bool]:
    """Matthews correlation coefficient. Returns (value, degenerate).

    Any zero factor in the denominator (a constant predicted or actual
    vector) yields 0.0 with the degenerate flag set.
    """
    m = confusion(predicted, actual)
    factors = [m.tp + m.fp, m.tp + m.fn, m.tn + m.fp, m.tn + m.fn]
    if any(f == 0 for f in factors):
        return 0.0, True
    num = m.tp * m.tn - m.fp * m.fn
    denom = math.sqrt(math.prod(float(f) for f in factors))
    return num / denom, False


def precision_at(scores: np.ndarray, actual: np.ndarray, budget: int) -> float:
    """Precision among the `budget` highest-scoring nodes.

    Ties are broken by ascending node index so the selection is a pure
    function of the score ordering: any strictly increasing transform of
    the scores leaves the result unchanged.
    """
    scores = np.asarray(scores, dtype=np.float64)
    actual = np.asarray(actual, dtype=bool)
    if scores.shape != actual.shape:
        raise DataError("scores and truth vectors differ in length")
    if budget < 1 or budget > scores.shape[0]:
        raise DataError(f"budget {budget} outside [1, {scores.shape[0]}]")
    # stable sort on -scores keeps ascending index order within ties
    order = np.argsort(-scores, kind="stable")[:budget]
    return float(np.sum(actual[order])) / budget


def argmax_disagreement(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Baseline flags: predicted class disagrees with the observed label."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.shape[0] != labels.shape[0]:
        raise DataError("probability rows and labels differ in length")
    return probs.argmax(axis=1) != labels
