"""Confusion matrices and per-class metrics."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from ..common.errors import InvalidLabel, InvalidTrueLabel
from ..domain.case import LabelTaxonomy
from ..domain.diagnosis import ABSTAIN
from ..domain.evaluation import ClassMetrics, ConfusionMatrix, MetricsSummary


def _ratio(num: int | Fraction, den: int | Fraction) -> Fraction:
    return Fraction(num) / Fraction(den) if den else Fraction(0)


def confusion_matrix(
    pairs: Iterable[tuple[str, Optional[str]]], taxonomy: LabelTaxonomy
) -> ConfusionMatrix:
    """Count (true, predicted) pairs; None or "abstain" lands in the abstain column."""
    labels = tuple(taxonomy.labels)
    index = {label: i for i, label in enumerate(labels)}
    abstain_col = len(labels)
    counts = [[0] * (len(labels) + 1) for _ in labels]
    for true, predicted in pairs:
        if true not in index:
            raise InvalidTrueLabel(f"true label {true!r} not in taxonomy")
        if predicted is None or predicted == ABSTAIN:
            col = abstain_col
        elif predicted in index:
            col = index[predicted]
        else:
            raise InvalidLabel(f"predicted label {predicted!r} not in taxonomy")
        counts[index[true]][col] += 1
    return ConfusionMatrix(labels=labels, counts=tuple(tuple(row) for row in counts))


def accuracy(matrix: ConfusionMatrix) -> Fraction:
    return _ratio(matrix.trace(), matrix.total)


def abstain_rate(matrix: ConfusionMatrix) -> Fraction:
    return _ratio(matrix.column_sum(len(matrix.labels)), matrix.total)


def per_class_metrics(matrix: ConfusionMatrix) -> MetricsSummary:
    """Precision, recall and F1 per label plus overall accuracy; 0 on empty denominators."""
    per_class = {}
    precisions, recalls, f1s = [], [], []
    for i, label in enumerate(matrix.labels):
        diag = matrix.counts[i][i]
        precision = _ratio(diag, matrix.column_sum(i))
        recall = _ratio(diag, matrix.row_sum(i))
        f1 = _ratio(2 * precision * recall, precision + recall)
        per_class[label] = ClassMetrics(
            precision=float(precision),
            recall=float(recall),
            f1=float(f1),
            support=matrix.row_sum(i),
        )
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    n = len(matrix.labels)
    return MetricsSummary(
        accuracy=float(accuracy(matrix)),
        per_class=per_class,
        macro_precision=float(_ratio(sum(precisions, Fraction(0)), n)),
        macro_recall=float(_ratio(sum(recalls, Fraction(0)), n)),
        macro_f1=float(_ratio(sum(f1s, Fraction(0)), n)),
    )


def top_confusions(matrix: ConfusionMatrix, limit: int = 3) -> tuple[dict, ...]:
    """Most frequent off-diagonal true→predicted pairs, abstains excluded."""
    cells = []
    for i, true in enumerate(matrix.labels):
        for j, predicted in enumerate(matrix.labels):
            if i != j and matrix.counts[i][j]:
                cells.append((-matrix.counts[i][j], i, j, true, predicted))
    cells.sort()
    return tuple(
        {"true": true, "predicted": predicted, "count": -neg}
        for neg, _, _, true, predicted in cells[:limit]
    )
