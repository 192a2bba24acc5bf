import random
from fractions import Fraction

import pytest

from potbi.common.errors import InvalidLabel, InvalidTrueLabel
from potbi.evaluation.metrics import (
    abstain_rate,
    accuracy,
    confusion_matrix,
    per_class_metrics,
    top_confusions,
)

LABELS = ("no_tbi", "mild_tbi", "moderate_tbi", "severe_tbi")

# two errors, one abstain
EIGHT_PAIRS = [
    ("no_tbi", "no_tbi"),
    ("no_tbi", "no_tbi"),
    ("mild_tbi", "no_tbi"),
    ("mild_tbi", "mild_tbi"),
    ("moderate_tbi", "moderate_tbi"),
    ("moderate_tbi", None),
    ("severe_tbi", "moderate_tbi"),
    ("severe_tbi", "severe_tbi"),
]


def test_identity_pairs(taxonomy):
    matrix = confusion_matrix([(label, label) for label in LABELS], taxonomy)
    assert matrix.counts == (
        (1, 0, 0, 0, 0),
        (0, 1, 0, 0, 0),
        (0, 0, 1, 0, 0),
        (0, 0, 0, 1, 0),
    )
    assert accuracy(matrix) == 1
    summary = per_class_metrics(matrix)
    for metrics in summary.per_class.values():
        assert (metrics.precision, metrics.recall, metrics.f1) == (1.0, 1.0, 1.0)
    assert summary.macro_f1 == 1.0


def test_no_pairs(taxonomy):
    matrix = confusion_matrix([], taxonomy)
    assert all(cell == 0 for row in matrix.counts for cell in row)
    assert matrix.columns == LABELS + ("abstain",)
    summary = per_class_metrics(matrix)
    assert summary.accuracy == 0.0
    assert summary.macro_precision == summary.macro_recall == summary.macro_f1 == 0.0
    for metrics in summary.per_class.values():
        assert (metrics.precision, metrics.recall, metrics.f1, metrics.support) == (0.0, 0.0, 0.0, 0)
    assert abstain_rate(matrix) == 0


def test_eight_pair_hand_count(taxonomy):
    matrix = confusion_matrix(EIGHT_PAIRS, taxonomy)
    assert matrix.counts == (
        (2, 0, 0, 0, 0),
        (1, 1, 0, 0, 0),
        (0, 0, 1, 0, 1),
        (0, 0, 1, 1, 0),
    )
    assert accuracy(matrix) == Fraction(5, 8)
    assert abstain_rate(matrix) == Fraction(1, 8)


def test_eight_pair_metrics(taxonomy):
    summary = per_class_metrics(confusion_matrix(EIGHT_PAIRS, taxonomy))
    expected = {
        "no_tbi": (2 / 3, 1.0, 0.8, 2),
        "mild_tbi": (1.0, 0.5, 2 / 3, 2),
        "moderate_tbi": (0.5, 0.5, 0.5, 2),
        "severe_tbi": (1.0, 0.5, 2 / 3, 2),
    }
    for label, (precision, recall, f1, support) in expected.items():
        metrics = summary.per_class[label]
        assert metrics.precision == pytest.approx(precision)
        assert metrics.recall == pytest.approx(recall)
        assert metrics.f1 == pytest.approx(f1)
        assert metrics.support == support
    assert summary.accuracy == 0.625
    assert summary.macro_precision == pytest.approx(19 / 24)
    assert summary.macro_recall == pytest.approx(5 / 8)
    assert summary.macro_f1 == pytest.approx(79 / 120)


def test_top_confusions(taxonomy):
    confusions = top_confusions(confusion_matrix(EIGHT_PAIRS, taxonomy))
    assert confusions == (
        {"true": "mild_tbi", "predicted": "no_tbi", "count": 1},
        {"true": "severe_tbi", "predicted": "moderate_tbi", "count": 1},
    )


def test_abstain_string_and_none_share_a_column(taxonomy):
    matrix = confusion_matrix([("no_tbi", None), ("no_tbi", "abstain")], taxonomy)
    assert matrix.counts[0] == (0, 0, 0, 0, 2)


def test_rejects_labels_outside_taxonomy(taxonomy):
    with pytest.raises(InvalidTrueLabel):
        confusion_matrix([("concussion", "no_tbi")], taxonomy)
    with pytest.raises(InvalidLabel):
        confusion_matrix([("no_tbi", "concussion")], taxonomy)


def random_pairs(rng, n):
    return [(rng.choice(LABELS), rng.choice(LABELS + (None,))) for _ in range(n)]


def test_random_matrices_hold_their_sums(taxonomy):
    rng = random.Random(2024)
    for _ in range(1000):
        pairs = random_pairs(rng, rng.randint(0, 30))
        matrix = confusion_matrix(pairs, taxonomy)
        assert matrix.total == len(pairs)
        for i, label in enumerate(LABELS):
            assert matrix.row_sum(i) == sum(1 for true, _ in pairs if true == label)
        correct = sum(1 for true, predicted in pairs if true == predicted)
        assert matrix.trace() == correct
        summary = per_class_metrics(matrix)
        values = [summary.accuracy, summary.macro_precision, summary.macro_recall, summary.macro_f1]
        for metrics in summary.per_class.values():
            values.extend([metrics.precision, metrics.recall, metrics.f1])
        assert all(0.0 <= v <= 1.0 for v in values)
        assert accuracy(matrix) + abstain_rate(matrix) <= 1


def test_fixing_a_wrong_prediction_never_lowers_accuracy(taxonomy):
    rng = random.Random(99)
    for _ in range(300):
        pairs = random_pairs(rng, rng.randint(1, 20))
        wrong = [i for i, (true, predicted) in enumerate(pairs) if true != predicted]
        if not wrong:
            continue
        i = rng.choice(wrong)
        fixed = pairs[:i] + [(pairs[i][0], pairs[i][0])] + pairs[i + 1 :]
        before = accuracy(confusion_matrix(pairs, taxonomy))
        after = accuracy(confusion_matrix(fixed, taxonomy))
        assert after - before == Fraction(1, len(pairs))


def test_appending_a_case_moves_accuracy_the_right_way(taxonomy):
    rng = random.Random(314)
    for _ in range(300):
        pairs = random_pairs(rng, rng.randint(1, 20))
        before = accuracy(confusion_matrix(pairs, taxonomy))
        true = rng.choice(LABELS)
        miss = rng.choice([label for label in LABELS if label != true] + [None])
        assert accuracy(confusion_matrix(pairs + [(true, true)], taxonomy)) >= before
        assert accuracy(confusion_matrix(pairs + [(true, miss)], taxonomy)) <= before
