"""Exact majority-vote accuracy by enumeration, and the matching Monte Carlo replay."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Literal, Mapping, Optional, Sequence

from ..common.errors import TooLarge, UnknownLabel
from ..consensus.voting import as_fraction, majority_vote
from ..domain.case import LabelTaxonomy
from ..domain.consensus import Tally
from .profiles import ErrorProfile
from .simulation import replay_votes

TieRule = Literal["abstain", "uniform"]

MAX_MODELS = 6
MAX_LABELS = 5


def _exact(p: float) -> Fraction:
    # symmetric profiles hold values like 1/15 as floats; recover the rational
    return as_fraction(p).limit_denominator(10**9)


def vote_tally(votes: Sequence[Optional[str]]) -> Tally:
    """Unit-weight tally over member votes; None marks a member without a valid answer."""
    counts: dict[str, Fraction] = {}
    valid = 0
    for label in votes:
        if label is None:
            continue
        counts[label] = counts.get(label, Fraction(0)) + 1
        valid += 1
    return Tally(counts=counts, valid=valid, total=len(votes), valid_weight=Fraction(valid))


def _credit(votes: Sequence[Optional[str]], true_label: str, tie_rule: TieRule, quorum) -> Fraction:
    result = majority_vote(vote_tally(votes), quorum)
    if result.outcome == "winner":
        return Fraction(1) if result.winner == true_label else Fraction(0)
    if result.outcome == "tie" and tie_rule == "uniform" and true_label in result.tied:
        return Fraction(1, len(result.tied))
    return Fraction(0)


def analytic_ensemble_accuracy(
    profiles: Sequence[ErrorProfile],
    taxonomy: LabelTaxonomy,
    tie_rule: TieRule = "abstain",
    quorum: float | Fraction = Fraction(1, 2),
    prior: Optional[Mapping[str, float]] = None,
) -> Fraction:
    """Exact expected accuracy of the unit-weight majority vote over independent members.

    Every joint outcome (each member answers one label or fails) is enumerated and
    weighted by the product of member probabilities. The true-label prior is uniform
    unless given.
    """
    labels = list(taxonomy.labels)
    if not profiles:
        raise ValueError("at least one profile is required")
    if len(profiles) > MAX_MODELS or len(labels) > MAX_LABELS:
        raise TooLarge(
            f"{len(profiles)} models x {len(labels)} labels exceeds "
            f"{MAX_MODELS} x {MAX_LABELS}"
        )
    if prior is None:
        weights = {label: Fraction(1, len(labels)) for label in labels}
    else:
        weights = {label: _exact(prior.get(label, 0.0)) for label in labels}

    total = Fraction(0)
    for true_label in labels:
        if not weights[true_label]:
            continue
        options = []
        for profile in profiles:
            if true_label not in profile.rows:
                raise UnknownLabel(f"profile has no row for {true_label!r}")
            failure = _exact(profile.failure_rate)
            row = profile.rows[true_label]
            member = [(None, failure)] if failure else []
            member += [
                (label, (1 - failure) * _exact(row.get(label, 0.0)))
                for label in labels
                if row.get(label, 0.0) > 0
            ]
            options.append([(label, p) for label, p in member if p])
        accuracy = Fraction(0)
        for outcome in itertools.product(*options):
            probability = Fraction(1)
            for _, p in outcome:
                probability *= p
            accuracy += probability * _credit([label for label, _ in outcome], true_label, tie_rule, quorum)
        total += weights[true_label] * accuracy
    return total


def replay_majority_accuracy(
    profiles: Mapping[str, ErrorProfile],
    truth: Mapping[str, str],
    seed: int,
    taxonomy: LabelTaxonomy,
    quorum: float | Fraction = Fraction(1, 2),
) -> Fraction:
    """Majority accuracy the mock consortium would score on `truth`, tie or no quorum counting as a miss."""
    if not truth:
        return Fraction(0)
    votes = replay_votes(profiles, truth, seed, taxonomy.labels)
    hits = sum(
        1
        for case_id, true_label in truth.items()
        if _credit(list(votes[case_id].values()), true_label, "abstain", quorum) == 1
    )
    return Fraction(hits, len(truth))
