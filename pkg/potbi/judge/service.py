"""Judge call and final decision policy."""

from __future__ import annotations

import logging
from typing import Literal, Optional, Sequence

from ..common.errors import UnknownJsonLabel, Unparseable, InvalidConfidence
from ..domain.case import CaseRecord, LabelTaxonomy
from ..domain.consensus import ConsensusResult
from ..domain.diagnosis import (
    ABSTAIN,
    FinalDiagnosis,
    JudgeFailure,
    JudgeOutcome,
    JudgePrompt,
    JudgeVerdict,
)
from ..domain.endpoint import ModelEndpoint
from ..domain.prediction import Prediction, ResponseStatus
from ..gateway.client import ModelGateway
from ..parsing.parser import extract_label

Policy = Literal["fallback_majority", "strict_judge"]

# deterministic decoding for reproducible verdicts
JUDGE_OPTIONS = {"temperature": 0}


class ReasoningJudge:
    """Queries the reasoning endpoint and parses its verdict."""

    def __init__(self, gateway: ModelGateway):
        self.gateway = gateway
        self.logger = logging.getLogger(self.__class__.__name__)

    def judge(
        self, endpoint: ModelEndpoint, prompt: JudgePrompt, taxonomy: LabelTaxonomy
    ) -> JudgeOutcome:
        """Return a verdict or a failure reason; never raises for remote trouble."""
        raw = self.gateway.infer_single(endpoint, prompt.text, image=None, options=JUDGE_OPTIONS)
        if raw.status is ResponseStatus.TIMEOUT:
            return JudgeFailure("timeout", raw.error)
        if not raw.ok or raw.body_text is None:
            return JudgeFailure("transport", raw.error or raw.status.value)
        try:
            found = extract_label(
                raw.body_text, taxonomy, label_field="final_label", rationale_field="reasoning"
            )
        except UnknownJsonLabel as e:
            self.logger.warning(f"judge named a label outside the taxonomy: {e.label!r}")
            return JudgeFailure("invalid_label", str(e))
        except (Unparseable, InvalidConfidence) as e:
            self.logger.warning(f"judge response unparseable: {e}")
            return JudgeFailure("unparseable", str(e))
        if found.label not in taxonomy:
            return JudgeFailure("invalid_label", found.label)
        return JudgeVerdict(label=found.label, rationale=found.rationale)


def decide(
    case: CaseRecord,
    predictions: Sequence[Prediction],
    consensus: ConsensusResult,
    judge_outcome: Optional[JudgeOutcome],
    policy: Policy = "fallback_majority",
) -> FinalDiagnosis:
    """Judge verdict first; on judge failure fall back per policy."""
    common = dict(case_id=case.case_id, predictions=tuple(predictions), consensus=consensus)
    if isinstance(judge_outcome, JudgeVerdict):
        return FinalDiagnosis(
            label=judge_outcome.label,
            source="judge",
            judge_rationale=judge_outcome.rationale,
            **common,
        )
    if policy == "fallback_majority" and consensus.outcome == "winner" and consensus.winner:
        return FinalDiagnosis(label=consensus.winner, source="majority", **common)
    return FinalDiagnosis(label=ABSTAIN, source="abstain", **common)
