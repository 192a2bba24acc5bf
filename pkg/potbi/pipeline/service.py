"""Pipeline service: fan-out, parse, vote, judge, decide, audit."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..catalog.manifest import load_case
from ..common.config import RunConfig
from ..common.errors import InvalidConfidence, NoValidPredictions, Unparseable
from ..common.telemetry import Telemetry
from ..consensus.voting import majority_vote, tally
from ..domain.case import CaseRecord, DatasetManifest, ManifestEntry
from ..domain.consensus import ConsensusResult, Tally
from ..domain.diagnosis import ABSTAIN, FinalDiagnosis, JudgeFailure, JudgeVerdict
from ..domain.evaluation import CaseOutcome, EvalReport
from ..domain.prediction import Prediction
from ..evaluation.report import compare_strategies, emit_report
from ..gateway.client import ModelGateway
from ..gateway.prompts import resolve_template
from ..ingestion.normalizer import ImageNormalizer
from ..judge.prompt import build_judge_prompt
from ..judge.service import ReasoningJudge, decide
from ..parsing.parser import parse_prediction
from ..provenance.audit import AuditLog, payload_digest


class PipelineService:
    """Runs cases through the consortium and the judge, chaining every stage into the audit log."""

    def __init__(
        self,
        config: RunConfig,
        gateway: ModelGateway,
        judge: ReasoningJudge,
        audit: AuditLog,
        telemetry: Telemetry,
        normalizer: Optional[ImageNormalizer] = None,
    ):
        self.config = config
        self.gateway = gateway
        self.judge = judge
        self.audit = audit
        self.telemetry = telemetry
        self.normalizer = normalizer or ImageNormalizer(config.max_image_side)
        self.logger = logging.getLogger(self.__class__.__name__)

    def run_case(self, case: CaseRecord) -> FinalDiagnosis:
        """Diagnose one case; NoValidPredictions unless abstain_on_empty is set."""
        return self.process_case(case, self.config.abstain_on_empty).final  # type: ignore[return-value]

    def process_case(self, case: CaseRecord, abstain_on_empty: bool = False) -> CaseOutcome:
        config = self.config
        audit = self.audit
        with self.telemetry.time_block("run_case"):
            audit.append(case.case_id, "ingest", case.summary())

            raws = self.gateway.fan_out(
                config.endpoints,
                case,
                config.templates,
                config.taxonomy,
                config.extra_context,
                config.fan_out_parallel,
            )
            audit.append(case.case_id, "fan_out", [r.to_dict() for r in raws])

            predictions: dict[str, Optional[Prediction]] = {}
            parse_log: dict[str, dict] = {}
            unparseable = 0
            for raw in raws:
                if not raw.ok:
                    predictions[raw.model_id] = None
                    parse_log[raw.model_id] = {"error": raw.status.value}
                    continue
                try:
                    prediction = parse_prediction(raw, config.taxonomy)
                except (Unparseable, InvalidConfidence) as e:
                    self.logger.warning(f"{raw.model_id} on {case.case_id[:12]}: {e}")
                    unparseable += 1
                    predictions[raw.model_id] = None
                    parse_log[raw.model_id] = {"error": "unparseable", "detail": str(e)}
                    continue
                predictions[raw.model_id] = prediction
                parse_log[raw.model_id] = prediction.to_dict()
            audit.append(case.case_id, "parse", parse_log)

            valid = [p for p in predictions.values() if p is not None]
            counts = tally(valid, config.endpoints, unparseable)
            consensus = majority_vote(counts, config.quorum, config.count_unparseable)
            audit.append(case.case_id, "consensus", consensus.to_dict())

            if not valid:
                audit.append(case.case_id, "judge", {"skipped": "no_valid_predictions"})
                if not abstain_on_empty:
                    raise NoValidPredictions(f"no member produced a usable prediction for {case.case_id}")
                judge_outcome = None
            else:
                prompt = build_judge_prompt(
                    case,
                    valid,
                    counts,
                    resolve_template(config.templates, config.judge_template_id),
                    config.taxonomy,
                    config.extra_context,
                )
                judge_outcome = self.judge.judge(config.judge_endpoint, prompt, config.taxonomy)
                audit.append(
                    case.case_id,
                    "judge",
                    {
                        "prompt_digest": payload_digest(prompt.text),
                        "included_models": list(prompt.included_models),
                        "outcome": _outcome_dict(judge_outcome),
                    },
                )

            final = decide(case, valid, consensus, judge_outcome, config.fallback_policy)
            audit.append(case.case_id, "decision", final.to_dict())
        self.telemetry.record_event("decision", case_id=case.case_id[:12], source=final.source)
        return CaseOutcome(case.case_id, predictions, consensus, final)

    def _failed_outcome(self, case_id: str, error: Exception) -> CaseOutcome:
        consensus = ConsensusResult(
            outcome="no_quorum",
            agreement=Fraction(0),
            tally=Tally(counts={}, valid=0, total=len(self.config.endpoints)),
        )
        final = FinalDiagnosis(
            case_id=case_id, label=ABSTAIN, source="abstain", predictions=(), consensus=consensus
        )
        self.audit.append(case_id, "decision", {**final.to_dict(), "error": str(error)})
        return CaseOutcome(
            case_id,
            {e.model_id: None for e in self.config.endpoints},
            consensus,
            final,
            error=str(error),
        )

    def _run_entry(self, manifest: DatasetManifest, entry: ManifestEntry) -> CaseOutcome:
        try:
            case = load_case(manifest, entry, self.normalizer)
            return self.process_case(case, abstain_on_empty=True)
        except Exception as e:
            # dataset runs record the failure as an abstain and keep going
            self.logger.error(f"Error running case {entry.case_id}: {e}")
            return self._failed_outcome(entry.case_id, e)

    def run_metadata(self) -> dict:
        config = self.config
        return {
            "seed": config.seed,
            "endpoints": [e.model_id for e in config.endpoints],
            "judge": config.judge_endpoint.model_id,
            "quorum": config.quorum,
            "fallback_policy": config.fallback_policy,
            "count_unparseable": config.count_unparseable,
        }

    def run_cases(self, manifest: DatasetManifest) -> list[CaseOutcome]:
        """Run every manifest entry, up to max_parallel at a time; results keep manifest order."""
        with self.telemetry.time_block("run_dataset"):
            with ThreadPoolExecutor(max_workers=self.config.max_parallel) as pool:
                outcomes = list(pool.map(lambda e: self._run_entry(manifest, e), manifest.entries))
        abstained = sum(1 for o in outcomes if o.final.abstained)  # type: ignore[attr-defined]
        self.logger.info(f"Ran {len(outcomes)} cases, {abstained} abstained")
        return outcomes

    def run_dataset(
        self, manifest: DatasetManifest, out_dir: Optional[str | Path] = None
    ) -> EvalReport:
        """Run the manifest, score every strategy and emit the report when out_dir is given."""
        metadata = self.run_metadata()
        if self.config.report_timestamps:
            metadata["started_at"] = datetime.now(timezone.utc).isoformat()
        outcomes = self.run_cases(manifest)
        if self.config.report_timestamps:
            metadata["finished_at"] = datetime.now(timezone.utc).isoformat()
        report = compare_strategies(
            manifest,
            outcomes,
            model_ids=[e.model_id for e in self.config.endpoints],
            run_metadata=metadata,
        )
        if out_dir is not None:
            emit_report(report, out_dir)
        return report


def _outcome_dict(outcome) -> dict:
    if isinstance(outcome, JudgeVerdict):
        return {"status": "verdict", "label": outcome.label, "rationale": outcome.rationale}
    if isinstance(outcome, JudgeFailure):
        return {"status": "failure", "reason": outcome.reason, "detail": outcome.detail}
    return {"status": "none"}
