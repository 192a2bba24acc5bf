"""Tally and consensus outcome values."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional

Outcome = Literal["winner", "tie", "no_quorum"]


def _number(value: Fraction) -> int | float:
    return int(value) if value.denominator == 1 else float(value)


@dataclass(frozen=True)
class Tally:
    """Weighted label counts over the consortium for one case."""

    counts: dict[str, Fraction]
    valid: int
    total: int
    valid_weight: Fraction = Fraction(0)
    unparseable: int = 0

    def max_count(self) -> Fraction:
        return max(self.counts.values(), default=Fraction(0))

    def to_dict(self) -> dict:
        return {
            "counts": {k: _number(v) for k, v in sorted(self.counts.items())},
            "valid": self.valid,
            "total": self.total,
            "unparseable": self.unparseable,
        }


@dataclass(frozen=True)
class ConsensusResult:
    """Winner, tie or missing quorum, with the agreement score."""

    outcome: Outcome
    agreement: Fraction
    tally: Tally
    winner: Optional[str] = None
    tied: frozenset[str] = field(default_factory=frozenset)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "winner": self.winner,
            "tied": sorted(self.tied),
            "agreement": float(self.agreement),
            "tally": self.tally.to_dict(),
        }
