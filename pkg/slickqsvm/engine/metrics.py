"""
Confusion counts and overlap metrics for binary oil masks (oil = positive)
"""
from typing import Iterable, Optional

import numpy as np

from slickqsvm.core.exceptions import DimensionMismatchException
from slickqsvm.models.schemas import AggregateMetrics, ConfusionCounts


def confusion(pred: np.ndarray, truth: np.ndarray, land: Optional[np.ndarray] = None) -> ConfusionCounts:
    """Pixel-wise counts over non-land pixels"""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise DimensionMismatchException(f"Prediction {pred.shape} and truth {truth.shape} differ")
    evaluated = np.ones(pred.shape, dtype=bool)
    if land is not None:
        land = np.asarray(land, dtype=bool)
        if land.shape != pred.shape:
            raise DimensionMismatchException(f"Land mask {land.shape} does not match prediction {pred.shape}")
        evaluated = ~land
    p, t = pred[evaluated], truth[evaluated]
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & t)),
        fp=int(np.count_nonzero(p & ~t)),
        tn=int(np.count_nonzero(~p & ~t)),
        fn=int(np.count_nonzero(~p & t)),
    )


def iou(c: ConfusionCounts) -> float:
    denominator = c.tp + c.fp + c.fn
    return 1.0 if denominator == 0 else c.tp / denominator


def f1(c: ConfusionCounts) -> float:
    denominator = 2 * c.tp + c.fp + c.fn
    return 1.0 if denominator == 0 else 2 * c.tp / denominator


def balanced_accuracy(c: ConfusionCounts) -> float:
    """Mean of oil and water recall; a class absent from the truth contributes 1"""
    oil_recall = 1.0 if c.tp + c.fn == 0 else c.tp / (c.tp + c.fn)
    water_recall = 1.0 if c.tn + c.fp == 0 else c.tn / (c.tn + c.fp)
    return 0.5 * (oil_recall + water_recall)


def pooled_counts(counts: Iterable[ConfusionCounts]) -> ConfusionCounts:
    return sum(counts, ConfusionCounts())


def aggregate_metrics(counts: Iterable[ConfusionCounts]) -> AggregateMetrics:
    """Metrics of the pooled table, never an average of per-scene metrics"""
    pooled = pooled_counts(counts)
    return AggregateMetrics(iou=iou(pooled), f1=f1(pooled), balanced_accuracy=balanced_accuracy(pooled), counts=pooled)
