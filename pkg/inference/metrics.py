"""
    Classification metrics over (p_malicious, label) scores.
    The positive class is malicious (label 1).
"""
import csv
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Tuple

import numpy as np

from basics.base_url_source import LABEL_NAMES
from utils import atomic_write
from utils.errors import DatasetError, InvalidInputError, SingleClassError

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> Dict[str, int]:
        return {'tp': self.tp, 'fp': self.fp, 'tn': self.tn, 'fn': self.fn}


class Summary(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    degenerate: Dict[str, bool]


@dataclass
class RocCurve:
    points: List[Tuple[float, float]] = field(default_factory=list)
    auc: float = 0.

    @property
    def fpr(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def tpr(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def unpack_scores(scores) -> Tuple[np.ndarray, np.ndarray]:
    """
    :param scores: iterable of (p_malicious, label) pairs, or a pair of equally long arrays
    :return: (probabilities [N] float64, labels [N] int64)
    """
    if isinstance(scores, tuple) and len(scores) == 2 and isinstance(scores[0], np.ndarray):
        probs, labels = scores
    else:
        pairs = list(scores)
        probs = np.array([p for p, _ in pairs], dtype=np.float64)
        labels = np.array([y for _, y in pairs], dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.shape != labels.shape or probs.ndim != 1:
        raise InvalidInputError(f'Scores and labels must be equally long 1-D arrays, got {probs.shape} and {labels.shape}.')
    if labels.size and not np.all(np.isin(labels, (0, 1))):
        raise InvalidInputError('Labels must be 0 (benign) or 1 (malicious).')
    return probs, labels.astype(np.int64)


def confusion(scores, threshold: float = DEFAULT_THRESHOLD) -> ConfusionMatrix:
    """Malicious is predicted iff p_malicious > threshold; p equal to the threshold counts as benign."""
    probs, labels = unpack_scores(scores)
    predicted = probs > threshold
    actual = labels == 1
    return ConfusionMatrix(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def confusion_from_predictions(predicted, labels) -> ConfusionMatrix:
    predicted = np.asarray(predicted) == 1
    actual = np.asarray(labels) == 1
    return ConfusionMatrix(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _ratio(num: int, den: int) -> Tuple[float, bool]:
    if den == 0:
        return 0., True
    return num / den, False


def _prf(tp: int, fp: int, fn: int) -> Tuple[float, float, float, Dict[str, bool]]:
    precision, p_degenerate = _ratio(tp, tp + fp)
    recall, r_degenerate = _ratio(tp, tp + fn)
    if precision + recall == 0.:
        f_measure, f_degenerate = 0., True
    else:
        f_measure, f_degenerate = 2. * precision * recall / (precision + recall), False
    return precision, recall, f_measure, {
        'precision': p_degenerate, 'recall': r_degenerate, 'f_measure': f_degenerate
    }


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise DatasetError('Cannot summarize an empty confusion matrix.')
    return (cm.tp + cm.tn) / cm.total


def summary(cm: ConfusionMatrix) -> Summary:
    acc = accuracy(cm)
    precision, recall, f_measure, degenerate = _prf(cm.tp, cm.fp, cm.fn)
    return Summary(accuracy=acc, precision=precision, recall=recall, f_measure=f_measure, degenerate=degenerate)


def per_class_summary(cm: ConfusionMatrix) -> Dict[str, Dict[str, float]]:
    if cm.total == 0:
        raise DatasetError('Cannot summarize an empty confusion matrix.')
    malicious = _prf(cm.tp, cm.fp, cm.fn)
    # benign as the positive class: its true positives are our true negatives
    benign = _prf(cm.tn, cm.fn, cm.fp)
    return {
        LABEL_NAMES[0]: {'precision': benign[0], 'recall': benign[1], 'f_measure': benign[2]},
        LABEL_NAMES[1]: {'precision': malicious[0], 'recall': malicious[1], 'f_measure': malicious[2]},
    }


def macro_summary(cm: ConfusionMatrix) -> Dict[str, float]:
    per_class = per_class_summary(cm)
    return {
        key: float(np.mean([v[key] for v in per_class.values()]))
        for key in ('precision', 'recall', 'f_measure')
    }


def trapezoid_area(points: Iterable[Tuple[float, float]]) -> float:
    pts = np.asarray(list(points), dtype=np.float64)
    if len(pts) < 2:
        return 0.
    x, y = pts[:, 0], pts[:, 1]
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.))


def roc(scores) -> RocCurve:
    """
    Sweep the decision threshold down through every distinct score. Samples with equal
    scores cross the threshold together, so a tie contributes a diagonal segment.
    """
    probs, labels = unpack_scores(scores)
    num_pos = int(np.sum(labels == 1))
    num_neg = int(np.sum(labels == 0))
    if num_pos == 0 or num_neg == 0:
        raise SingleClassError(f'ROC needs both classes, got {num_pos} malicious and {num_neg} benign.')

    order = np.argsort(-probs, kind='mergesort')
    sorted_probs = probs[order]
    sorted_labels = labels[order]
    tps = np.cumsum(sorted_labels == 1)
    fps = np.cumsum(sorted_labels == 0)
    # last index of every block of equal scores
    block_ends = np.nonzero(np.diff(sorted_probs) != 0)[0]
    block_ends = np.append(block_ends, len(sorted_probs) - 1)

    points = [(0., 0.)]
    for i in block_ends:
        point = (fps[i] / num_neg, tps[i] / num_pos)
        if point != points[-1]:
            points.append((float(point[0]), float(point[1])))
    if points[-1] != (1., 1.):
        points.append((1., 1.))
    return RocCurve(points=points, auc=trapezoid_area(points))


def report_dict(cm: ConfusionMatrix, curve: RocCurve = None) -> dict:
    s = summary(cm)
    report = {
        'n': cm.total,
        'confusion_matrix': cm.to_dict(),
        'accuracy': s.accuracy,
        'precision': s.precision,
        'recall': s.recall,
        'f_measure': s.f_measure,
        'degenerate': s.degenerate,
        'per_class': per_class_summary(cm),
        'macro': macro_summary(cm),
    }
    if curve is not None:
        report['auc'] = curve.auc
    return report


def write_roc_csv(curve: RocCurve, path):
    with atomic_write(path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['fpr', 'tpr'])
        for fpr, tpr in curve.points:
            writer.writerow([repr(fpr), repr(tpr)])
