"""Weighted plurality voting with quorum and explicit ties."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..common.errors import UnknownModelId
from ..domain.consensus import ConsensusResult, Tally
from ..domain.endpoint import ModelEndpoint
from ..domain.prediction import Prediction


def as_fraction(value: float | int | Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    # str() keeps 0.8 as 4/5 instead of its binary expansion
    return Fraction(str(value))


def tally(
    predictions: Sequence[Prediction],
    endpoints: Sequence[ModelEndpoint],
    unparseable: int = 0,
) -> Tally:
    """Accumulate endpoint weights per predicted label."""
    weights = {e.model_id: as_fraction(e.weight) for e in endpoints}
    counts: dict[str, Fraction] = {}
    valid_weight = Fraction(0)
    for prediction in predictions:
        if prediction.model_id not in weights:
            raise UnknownModelId(f"prediction from unknown model {prediction.model_id!r}")
        weight = weights[prediction.model_id]
        counts[prediction.label] = counts.get(prediction.label, Fraction(0)) + weight
        valid_weight += weight
    return Tally(
        counts=counts,
        valid=len(predictions),
        total=len(endpoints),
        valid_weight=valid_weight,
        unparseable=unparseable,
    )


def agreement_score(t: Tally, count_unparseable: bool = False) -> Fraction:
    """Share of valid vote weight held by the modal label; 0 without votes."""
    if t.valid == 0:
        return Fraction(0)
    denominator = t.valid_weight if t.valid_weight else Fraction(t.valid)
    if count_unparseable and t.unparseable:
        # unparseable members count as unit-weight dissent
        denominator += t.unparseable
    return t.max_count() / denominator


def majority_vote(
    t: Tally, quorum: float | Fraction = Fraction(1, 2), count_unparseable: bool = False
) -> ConsensusResult:
    """Strict plurality winner, tie set, or no_quorum when too few members answered."""
    quorum = as_fraction(quorum)
    if not 0 < quorum <= 1:
        raise ValueError(f"quorum {quorum} outside (0, 1]")
    agreement = agreement_score(t, count_unparseable)
    if t.total == 0 or Fraction(t.valid, t.total) < quorum or not t.counts:
        return ConsensusResult(outcome="no_quorum", agreement=agreement, tally=t)
    top = t.max_count()
    leaders = frozenset(label for label, count in t.counts.items() if count == top)
    if len(leaders) == 1:
        (winner,) = leaders
        return ConsensusResult(outcome="winner", agreement=agreement, tally=t, winner=winner)
    return ConsensusResult(outcome="tie", agreement=agreement, tally=t, tied=leaders)
