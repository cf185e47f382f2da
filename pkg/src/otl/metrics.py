"""Binary classification metrics and the transfer-vs-direct improvement statistic.

Ratio metrics whose denominator can legitimately be empty (no reported
positives, no actual positives, zero baseline) return ``None`` rather than
a silent 0: data-scarce sweeps genuinely produce such folds and the
distinction matters downstream.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .validation import as_value_vector

__all__ = [
    "ConfusionCounts",
    "accuracy",
    "precision",
    "sensitivity",
    "auroc",
    "relative_improvement",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, predicted, actual):
        predicted = np.asarray(predicted, dtype=bool)
        actual = np.asarray(actual, dtype=bool)
        if predicted.shape != actual.shape:
            raise ValueError("predicted and actual must have equal shape")
        return cls(
            tp=int(np.sum(predicted & actual)),
            fp=int(np.sum(predicted & ~actual)),
            tn=int(np.sum(~predicted & ~actual)),
            fn=int(np.sum(~predicted & actual)),
        )


def accuracy(c):
    """(tp + tn) / total: the ratio of correct predictions."""
    if c.total == 0:
        raise ValueError("accuracy undefined on zero total")
    return (c.tp + c.tn) / c.total


def precision(c):
    """tp / (tp + fp); None when nothing was reported positive."""
    if c.tp + c.fp == 0:
        return None
    return c.tp / (c.tp + c.fp)


def sensitivity(c):
    """tp / (tp + fn); None when there are no actual positives."""
    if c.tp + c.fn == 0:
        return None
    return c.tp / (c.tp + c.fn)


def auroc(scores, labels):
    """Probability that a random positive outscores a random negative.

    Computed as the Mann-Whitney rank statistic with ties counted one
    half, which equals the trapezoidal area under the ROC curve.
    """
    scores = as_value_vector(scores, name="scores")
    labels = np.asarray(labels, dtype=bool)
    if labels.shape != scores.shape:
        raise ValueError("scores and labels must have equal length")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auroc needs at least one sample of each class")
    ranks = rankdata(scores, method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def relative_improvement(metric_tl, metric_direct):
    """Signed percent change of the transfer metric over the direct one.

    ``(metric_tl - metric_direct) / metric_direct * 100``; None when the
    direct baseline is zero (or undefined inputs were propagated).
    """
    if metric_tl is None or metric_direct is None:
        return None
    if metric_direct == 0:
        return None
    return (metric_tl - metric_direct) / metric_direct * 100.0
