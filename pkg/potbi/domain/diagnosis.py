"""Judge prompt, judge outcomes and the final diagnosis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Union

from .consensus import ConsensusResult
from .prediction import Prediction

ABSTAIN = "abstain"

DecisionSource = Literal["judge", "majority", "abstain"]
FailureReason = Literal["transport", "timeout", "unparseable", "invalid_label"]


@dataclass(frozen=True)
class JudgePrompt:
    text: str
    included_models: tuple[str, ...]


@dataclass(frozen=True)
class JudgeVerdict:
    label: str
    rationale: str


@dataclass(frozen=True)
class JudgeFailure:
    reason: FailureReason
    detail: str = ""


JudgeOutcome = Union[JudgeVerdict, JudgeFailure]


@dataclass(frozen=True)
class FinalDiagnosis:
    """The pipeline's answer for one case."""

    case_id: str
    label: str
    source: DecisionSource
    predictions: tuple[Prediction, ...]
    consensus: ConsensusResult
    judge_rationale: Optional[str] = None

    def __post_init__(self):
        if self.source == "judge" and self.judge_rationale is None:
            raise ValueError("judge decisions carry a rationale")
        if (self.label == ABSTAIN) != (self.source == "abstain"):
            raise ValueError("label abstain and source abstain go together")

    @property
    def abstained(self) -> bool:
        return self.source == "abstain"

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "label": self.label,
            "source": self.source,
            "judge_rationale": self.judge_rationale,
            "predictions": [p.to_dict() for p in self.predictions],
            "consensus": self.consensus.to_dict(),
        }
