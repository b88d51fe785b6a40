"""Per-class one-vs-rest metrics, balanced accuracy and Cohen's kappa."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class ClassMetrics:
    sensitivity: float
    specificity: float
    precision: float
    support: int
    precision_undefined: bool = False


@dataclass(frozen=True)
class MetricsReport:
    classes: tuple
    balanced_accuracy: float
    per_class: dict = field(default_factory=dict)  # behaviour -> ClassMetrics
    confusion: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    n_test_windows: int = 0

    def confusion_percent(self) -> np.ndarray:
        """Row-normalized confusion matrix in percent; empty rows stay 0."""
        rows = self.confusion.sum(axis=1, keepdims=True).astype(float)
        return np.divide(100.0 * self.confusion, rows, out=np.zeros(self.confusion.shape), where=rows > 0)

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "balanced_accuracy": self.balanced_accuracy,
            "n_test_windows": self.n_test_windows,
            "per_class": {
                c: {
                    "sensitivity": m.sensitivity,
                    "specificity": m.specificity,
                    "precision": m.precision,
                    "support": m.support,
                    "precision_undefined": m.precision_undefined,
                }
                for c, m in self.per_class.items()
            },
            "confusion": self.confusion.tolist(),
        }


def confusion_matrix(actual: Sequence[str], predicted: Sequence[str], classes: Sequence[str]) -> np.ndarray:
    """Counts with rows = actual class and columns = predicted class."""
    if len(actual) != len(predicted):
        raise ValidationError(f"{len(actual)} actual labels but {len(predicted)} predictions")
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for a, p in zip(actual, predicted):
        if a not in index or p not in index:
            raise ValidationError(f"label {a if a not in index else p!r} is not among the classes")
        cm[index[a], index[p]] += 1
    return cm


def metrics_from_confusion(cm: np.ndarray, classes: Sequence[str]) -> MetricsReport:
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    per_class = {}
    recalls = []
    for i, c in enumerate(classes):
        tp = int(cm[i, i])
        fn = int(cm[i].sum()) - tp
        fp = int(cm[:, i].sum()) - tp
        tn = total - tp - fn - fp
        sens = tp / (tp + fn) if tp + fn else 0.0
        spec = tn / (tn + fp) if tn + fp else 0.0
        undefined = tp + fp == 0
        prec = 0.0 if undefined else tp / (tp + fp)
        per_class[c] = ClassMetrics(sens, spec, prec, tp + fn, undefined)
        if tp + fn:
            recalls.append(sens)
    ba = float(np.mean(recalls)) if recalls else 0.0
    return MetricsReport(tuple(classes), ba, per_class, cm, total)


def compute_metrics(actual: Sequence[str], predicted: Sequence[str], classes: Sequence[str]) -> MetricsReport:
    """Sensitivity, specificity and precision per class plus balanced accuracy.

    Balanced accuracy is the mean sensitivity over classes that occur in
    ``actual``. Precision of a class that is never predicted is 0 and flagged.
    """
    return metrics_from_confusion(confusion_matrix(actual, predicted, classes), classes)


def balanced_accuracy(actual, predicted) -> float:
    classes = sorted(set(actual) | set(predicted))
    return compute_metrics(actual, predicted, classes).balanced_accuracy


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement; 1 when both raters use one identical label."""
    if len(labels_a) != len(labels_b):
        raise ValidationError(f"rater sequences differ in length ({len(labels_a)} vs {len(labels_b)})")
    if len(labels_a) == 0:
        raise ValidationError("cohens_kappa needs at least one rating")
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    cats, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    ia, ib = inv[: len(a)], inv[len(a):]
    n = len(a)
    p_o = float(np.mean(ia == ib))
    pa = np.bincount(ia, minlength=len(cats)) / n
    pb = np.bincount(ib, minlength=len(cats)) / n
    p_e = float(pa @ pb)
    if p_e >= 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)
