"""Evaluation suite: confusion counts, threshold metrics, ROC/AUC, pooled averages.

Metrics with a zero denominator are reported as None (undefined), never as a
silent 0 or 1, so they cannot corrupt downstream averages. The ROC sweep
accumulates an integer numerator, which makes the trapezoidal area equal the
pair-counting statistic (ties credited one half) not just approximately but
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_BETA = 0.9


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 0):
                raise ValueError(f"{name} must be a nonnegative integer")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricSet:
    """Accuracy, precision, recall and the F score at the given beta.

    None marks an undefined metric (zero denominator).
    """

    accuracy: float | None
    precision: float | None
    recall: float | None
    f_beta: float | None
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        for name in ("accuracy", "precision", "recall", "f_beta"):
            value = getattr(self, name)
            if value is not None and not (0.0 <= value <= 1.0):
                raise ValueError(f"{name}={value!r} outside [0, 1]")


def confusion_matrix(
    predictions: Sequence, labels: Sequence, positive
) -> ConfusionMatrix:
    """Count the four outcomes with the declared positive class."""
    if len(predictions) != len(labels):
        raise ValueError("predictions and labels must have equal length")
    if len(labels) == 0:
        raise ValueError("cannot evaluate an empty sample")
    tp = fp = fn = tn = 0
    for pred, truth in zip(predictions, labels):
        if pred == positive:
            if truth == positive:
                tp += 1
            else:
                fp += 1
        else:
            if truth == positive:
                fn += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def f_beta_score(precision: float, recall: float, beta: float = DEFAULT_BETA) -> float | None:
    """(1 + beta^2) P R / (beta^2 P + R); None when the denominator vanishes."""
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return None
    return (1.0 + beta * beta) * precision * recall / denom


def classification_metrics(cm: ConfusionMatrix, beta: float = DEFAULT_BETA) -> MetricSet:
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) > 0 else None
    recall = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else None
    if precision is None or recall is None:
        f_beta = None
    else:
        f_beta = f_beta_score(precision, recall, beta)
    return MetricSet(
        accuracy=accuracy, precision=precision, recall=recall, f_beta=f_beta, beta=beta
    )


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr) sweep from (0, 0) to (1, 1) plus the area under it."""

    points: tuple[tuple[float, float], ...]
    auc: float

    def __post_init__(self):
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise ValueError("curve must run from (0, 0) to (1, 1)")
        for (f0, t0), (f1, t1) in zip(self.points, self.points[1:]):
            if f1 < f0 or t1 < t0:
                raise ValueError("curve must be nondecreasing in both coordinates")
        if not (0.0 <= self.auc <= 1.0):
            raise ValueError("auc outside [0, 1]")


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Sweep every distinct score threshold; integrate trapezoidally.

    labels are binary with 1 (or True) the positive class. The area is
    accumulated as an integer numerator over 2 * positives * negatives, which
    equals counting correctly ordered positive/negative pairs with ties
    worth one half.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    pos_mask = y == 1
    n_pos = int(pos_mask.sum())
    n_neg = int(len(y) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: both classes must be present")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = pos_mask[order]

    points = [(0.0, 0.0)]
    tp = fp = 0
    numerator = 0  # integer: 2 * (correctly ordered pairs) + (tied pairs)
    i = 0
    n = len(y)
    while i < n:
        j = i
        group_pos = group_neg = 0
        while j < n and s_sorted[j] == s_sorted[i]:
            if pos_sorted[j]:
                group_pos += 1
            else:
                group_neg += 1
            j += 1
        numerator += group_neg * (2 * tp + group_pos)
        tp += group_pos
        fp += group_neg
        points.append((fp / n_neg, tp / n_pos))
        i = j
    return RocCurve(points=tuple(points), auc=numerator / (2 * n_pos * n_neg))


@dataclass(frozen=True)
class WeightedEntry:
    """A [0, 1]-valued index together with the sample count behind it."""

    value: float
    n: int

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError("value outside [0, 1]")
        if not (isinstance(self.n, int) and self.n > 0):
            raise ValueError("n must be a positive integer")


def weighted_average(entries: Iterable[WeightedEntry]) -> float:
    """Sample-count-weighted mean of the entries."""
    entries = list(entries)
    if not entries:
        raise ValueError("weighted_average of an empty list")
    total_n = sum(e.n for e in entries)
    return sum(e.value * e.n for e in entries) / total_n


def efficiency_index(final_reports: Sequence) -> float:
    """Fraction of auto-filled report fields the doctor left unchanged.

    Pooled over every field of every report; equivalent to a weighted average
    of per-field accuracies with n = field count. Accepts only finalized
    benign-route reports (the index measures saved repetitive work on the
    auto-drafted fields, which only benign drafts have).
    """
    from .reports import FinalReport, Route

    if not final_reports:
        raise ValueError("efficiency index of an empty report list")
    unchanged = 0
    total = 0
    for report in final_reports:
        if not isinstance(report, FinalReport):
            raise ValueError("efficiency index requires finalized reports")
        if report.route is not Route.BENIGN_AUTO:
            raise ValueError("efficiency index is defined over benign-route reports")
        edited = {entry.field for entry in report.edit_log}
        for fld in report.fields:
            total += 1
            if fld.name not in edited:
                unchanged += 1
    return unchanged / total


# ---------------------------------------------------------------------------
# tabular exports


@dataclass(frozen=True)
class MetricsRow:
    model: str
    feature: str
    split: str
    n: int
    metrics: MetricSet
    auc: float | None = None


def _cell(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def metrics_table(rows: Sequence[MetricsRow]) -> str:
    """One row per (model, feature): tab-separated, fixed 4-decimal cells."""
    lines = ["model\tfeature\tsplit\tn\taccuracy\tprecision\trecall\tf_beta\tauc"]
    for row in rows:
        m = row.metrics
        lines.append(
            "\t".join(
                [
                    row.model,
                    row.feature,
                    row.split,
                    str(row.n),
                    _cell(m.accuracy),
                    _cell(m.precision),
                    _cell(m.recall),
                    _cell(m.f_beta),
                    _cell(row.auc),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def roc_export(curve: RocCurve) -> str:
    """Point list for plotting; the area rides along as a header comment."""
    lines = [f"# auc\t{curve.auc!r}", "fpr\ttpr"]
    for fpr, tpr in curve.points:
        lines.append(f"{fpr!r}\t{tpr!r}")
    return "\n".join(lines) + "\n"
