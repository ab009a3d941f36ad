import numpy as np
import pytest

from slickqsvm.core.exceptions import DimensionMismatchException
from slickqsvm.engine.metrics import (
    aggregate_metrics,
    balanced_accuracy,
    confusion,
    f1,
    iou,
    pooled_counts,
)
from slickqsvm.models.schemas import ConfusionCounts


def test_confusion_examples():
    """Identity, all-water and the 2x2 enumeration case"""
    truth = np.array([[True, False], [True, False]])
    perfect = confusion(truth, truth)
    assert perfect.fp == 0 and perfect.fn == 0 and perfect.tp == 2

    water = confusion(np.zeros((3, 3), dtype=bool), np.zeros((3, 3), dtype=bool))
    assert water == ConfusionCounts(tn=9)

    pred = np.array([[True, True], [False, False]])
    truth = np.array([[True, False], [True, False]])
    assert confusion(pred, truth) == ConfusionCounts(tp=1, fp=1, tn=1, fn=1)


def test_confusion_excludes_land():
    """Land pixels are not counted"""
    pred = np.ones((2, 2), dtype=bool)
    truth = np.zeros((2, 2), dtype=bool)
    land = np.array([[True, True], [False, False]])
    counts = confusion(pred, truth, land)
    assert counts.total == 2
    assert counts.fp == 2


def test_confusion_dimension_mismatch():
    """Prediction, truth and land must align"""
    with pytest.raises(DimensionMismatchException):
        confusion(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionMismatchException):
        confusion(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((3, 3)))


def test_metric_examples():
    """Perfect, balanced and missed-oil tables"""
    perfect = ConfusionCounts(tp=5, tn=7)
    assert iou(perfect) == f1(perfect) == balanced_accuracy(perfect) == 1.0

    even = ConfusionCounts(tp=1, fp=1, tn=1, fn=1)
    assert iou(even) == pytest.approx(1 / 3)
    assert f1(even) == 0.5
    assert balanced_accuracy(even) == 0.5

    missed = ConfusionCounts(tp=0, fp=0, tn=10, fn=4)
    assert iou(missed) == 0.0 and f1(missed) == 0.0


def test_empty_denominator_conventions():
    """All-water scenes predicted as water score 1; an absent class contributes 1 to BA"""
    water = ConfusionCounts(tn=16)
    assert iou(water) == 1.0 and f1(water) == 1.0 and balanced_accuracy(water) == 1.0
    false_alarm = ConfusionCounts(fp=4, tn=12)
    assert balanced_accuracy(false_alarm) == pytest.approx(0.5 * (1.0 + 12 / 16))


def test_f1_iou_identity(rng):
    """f1 = 2 iou / (1 + iou) on random tables"""
    for _ in range(1000):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 50, size=4))
        counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
        value = iou(counts)
        assert f1(counts) == pytest.approx(2 * value / (1 + value), abs=1e-12)


def test_metrics_stay_in_unit_interval(rng):
    """Every metric lies in [0, 1]"""
    for _ in range(200):
        counts = ConfusionCounts(**dict(zip(("tp", "fp", "tn", "fn"), (int(v) for v in rng.integers(0, 20, size=4)))))
        for metric in (iou, f1, balanced_accuracy):
            assert 0.0 <= metric(counts) <= 1.0


def test_aggregate_pools_counts():
    """Aggregates come from summed counts, not averaged scene metrics"""
    first = ConfusionCounts(tp=9, fp=1, tn=0, fn=0)
    second = ConfusionCounts(tp=0, fp=0, tn=5, fn=1)
    pooled = pooled_counts([first, second])
    assert pooled == ConfusionCounts(tp=9, fp=1, tn=5, fn=1)
    aggregate = aggregate_metrics([first, second])
    assert aggregate.iou == pytest.approx(9 / 11)
    assert aggregate.iou != pytest.approx((iou(first) + iou(second)) / 2)
