import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from potbi.common.errors import UnknownModelId
from potbi.consensus.voting import agreement_score, majority_vote, tally
from potbi.domain.consensus import Tally
from potbi.domain.endpoint import ModelEndpoint
from potbi.domain.prediction import Prediction


def members(count, weights=None):
    weights = weights or [1.0] * count
    return [
        ModelEndpoint(model_id=f"m{i}", base_url="http://127.0.0.1:1", model_name=f"m{i}", weight=w)
        for i, w in enumerate(weights)
    ]


def votes(*labels):
    return [Prediction(model_id=f"m{i}", label=label) for i, label in enumerate(labels) if label]


def counts_tally(counts, valid, total):
    return Tally(
        counts={k: Fraction(v) for k, v in counts.items()},
        valid=valid,
        total=total,
        valid_weight=Fraction(sum(counts.values())),
    )


def test_tally_counts_unit_weights():
    t = tally(votes("A", "A", "B"), members(3))
    assert t.counts == {"A": 2, "B": 1}
    assert (t.valid, t.total) == (3, 3)


def test_tally_empty():
    t = tally([], members(3))
    assert t.counts == {}
    assert (t.valid, t.total) == (0, 3)


def test_tally_weighted():
    t = tally(votes("A", "B", "B"), members(3, [2.0, 1.0, 1.0]))
    assert t.counts == {"A": 2, "B": 2}


def test_tally_rejects_unknown_model():
    with pytest.raises(UnknownModelId):
        tally([Prediction(model_id="ghost", label="A")], members(2))


def test_strict_majority():
    result = majority_vote(counts_tally({"A": 2, "B": 1}, 3, 3), Fraction(1, 2))
    assert result.outcome == "winner"
    assert result.winner == "A"
    assert result.agreement == Fraction(2, 3)


def test_three_way_tie():
    result = majority_vote(counts_tally({"A": 1, "B": 1, "C": 1}, 3, 3))
    assert result.outcome == "tie"
    assert result.tied == {"A", "B", "C"}
    assert result.winner is None
    assert result.agreement == Fraction(1, 3)


def test_no_quorum():
    result = majority_vote(counts_tally({"A": 1}, 1, 3), 0.5)
    assert result.outcome == "no_quorum"
    assert result.winner is None


@pytest.mark.parametrize("quorum", [0, -0.1, 1.5])
def test_quorum_bounds(quorum):
    with pytest.raises(ValueError):
        majority_vote(counts_tally({"A": 1}, 1, 1), quorum)


def test_quorum_of_one_needs_everyone():
    assert majority_vote(counts_tally({"A": 2}, 2, 3), 1).outcome == "no_quorum"
    assert majority_vote(counts_tally({"A": 3}, 3, 3), 1).outcome == "winner"


@pytest.mark.parametrize(
    "counts,valid,expected",
    [({"A": 3}, 3, Fraction(1)), ({"A": 2, "B": 1}, 3, Fraction(2, 3)), ({}, 0, Fraction(0))],
)
def test_agreement_score(counts, valid, expected):
    assert agreement_score(counts_tally(counts, valid, 3)) == expected


def test_unparseable_dissent_only_when_enabled():
    t = tally(votes("A", "A"), members(3), unparseable=1)
    assert agreement_score(t) == 1
    assert agreement_score(t, count_unparseable=True) == Fraction(2, 3)


def test_weighted_agreement_uses_vote_weight():
    t = tally(votes("A", "B", "B"), members(3, [3.0, 1.0, 1.0]))
    result = majority_vote(t)
    assert result.winner == "A"
    assert result.agreement == Fraction(3, 5)


def test_unanimity():
    for size in range(1, 7):
        result = majority_vote(tally(votes(*["B"] * size), members(size)))
        assert result.outcome == "winner"
        assert result.winner == "B"
        assert result.agreement == 1


def test_permutation_invariance():
    rng = random.Random(7)
    for _ in range(1000):
        size = rng.randint(1, 7)
        labels = [rng.choice(["A", "B", "C", None]) for _ in range(size)]
        endpoints = members(size, [rng.choice([0.5, 1.0, 2.0]) for _ in range(size)])
        predictions = [
            Prediction(model_id=f"m{i}", label=label) for i, label in enumerate(labels) if label
        ]
        shuffled = predictions[:]
        rng.shuffle(shuffled)
        expected = majority_vote(tally(predictions, endpoints))
        actual = majority_vote(tally(shuffled, endpoints))
        assert actual.to_dict() == expected.to_dict()


def test_winner_dominates_every_other_label():
    rng = random.Random(11)
    for _ in range(500):
        size = rng.randint(1, 6)
        endpoints = members(size, [rng.choice([0.5, 1.0, 1.5, 2.0]) for _ in range(size)])
        result = majority_vote(tally(votes(*[rng.choice("ABC") for _ in range(size)]), endpoints))
        if result.outcome == "winner":
            others = [c for label, c in result.tally.counts.items() if label != result.winner]
            assert all(result.tally.counts[result.winner] > c for c in others)


def test_weight_scaling_keeps_outcome():
    rng = random.Random(3)
    for _ in range(300):
        size = rng.randint(1, 6)
        weights = [rng.choice([0.5, 1.0, 1.5, 2.0]) for _ in range(size)]
        predictions = votes(*[rng.choice("ABC") for _ in range(size)])
        base = majority_vote(tally(predictions, members(size, weights)))
        for factor in (0.5, 2.0, 3.0, 10.0):
            scaled = majority_vote(tally(predictions, members(size, [w * factor for w in weights])))
            assert (scaled.outcome, scaled.winner, scaled.tied) == (base.outcome, base.winner, base.tied)
            assert scaled.agreement == base.agreement


def naive_vote(labels, quorum):
    valid = [label for label in labels if label is not None]
    if not valid or Fraction(len(valid), len(labels)) < quorum:
        return ("no_quorum", None, frozenset())
    counter = Counter(valid)
    top = max(counter.values())
    leaders = frozenset(label for label, count in counter.items() if count == top)
    if len(leaders) == 1:
        return ("winner", next(iter(leaders)), frozenset())
    return ("tie", None, leaders)


@pytest.mark.parametrize("quorum", [Fraction(1, 2), Fraction(1, 3), Fraction(1)])
def test_exhaustive_against_naive_reference(quorum):
    for size in range(1, 5):
        for label_count in range(1, 4):
            choices = [None] + list("ABC"[:label_count])
            for labels in itertools.product(choices, repeat=size):
                result = majority_vote(tally(votes(*labels), members(size)), quorum)
                assert (result.outcome, result.winner, result.tied) == naive_vote(labels, quorum)
