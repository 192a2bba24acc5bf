"""Strategy comparison and report emission."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..common.errors import MissingGroundTruth, StrategyNameConflict
from ..domain.case import DatasetManifest
from ..domain.diagnosis import ABSTAIN
from ..domain.evaluation import (
    JUDGE,
    MAJORITY,
    CaseOutcome,
    EvalReport,
    StrategyReport,
    strategy_file_stem,
    strategy_name_conflicts,
)
from .metrics import abstain_rate, confusion_matrix, per_class_metrics, top_confusions


logger = logging.getLogger(__name__)


def _strategy_report(
    pairs: list[tuple[str, Optional[str]]], manifest: DatasetManifest, agreement=None
) -> StrategyReport:
    matrix = confusion_matrix(pairs, manifest.taxonomy)
    summary = per_class_metrics(matrix)
    return StrategyReport(
        confusion=matrix,
        accuracy=summary.accuracy,
        per_class=summary.per_class,
        abstain_rate=float(abstain_rate(matrix)),
        macro_precision=summary.macro_precision,
        macro_recall=summary.macro_recall,
        macro_f1=summary.macro_f1,
        top_confusions=top_confusions(matrix),
        agreement_with_final=agreement,
    )


def compare_strategies(
    manifest: DatasetManifest,
    case_results: Sequence[CaseOutcome],
    model_ids: Optional[Iterable[str]] = None,
    run_metadata: Optional[dict] = None,
) -> EvalReport:
    """Score every member, the majority vote and the judge-led final decision."""
    truth = manifest.truth_lookup()
    if model_ids is None:
        seen: dict[str, None] = {}
        for outcome in case_results:
            seen.update(dict.fromkeys(outcome.predictions))
        model_ids = list(seen)
    model_ids = list(model_ids)
    conflicts = strategy_name_conflicts(model_ids)
    if conflicts:
        raise StrategyNameConflict(f"model ids {conflicts} clash with another strategy name")

    member_pairs: dict[str, list] = {m: [] for m in model_ids}
    member_agree: dict[str, int] = {m: 0 for m in model_ids}
    majority_pairs, judge_pairs = [], []
    for outcome in case_results:
        if outcome.case_id not in truth:
            raise MissingGroundTruth(f"case {outcome.case_id} has no labeled manifest entry")
        true = truth[outcome.case_id]
        final_label = outcome.final.label
        for model_id in model_ids:
            prediction = outcome.predictions.get(model_id)
            predicted = prediction.label if prediction is not None else ABSTAIN
            member_pairs[model_id].append((true, predicted))
            if predicted != ABSTAIN and predicted == final_label:
                member_agree[model_id] += 1
        consensus = outcome.consensus
        majority_pairs.append((true, consensus.winner if consensus.outcome == "winner" else ABSTAIN))
        judge_pairs.append((true, final_label))

    n = len(case_results)
    strategies: dict[str, StrategyReport] = {}
    for model_id in model_ids:
        agreement = member_agree[model_id] / n if n else 0.0
        strategies[model_id] = _strategy_report(member_pairs[model_id], manifest, agreement)
    strategies[MAJORITY] = _strategy_report(majority_pairs, manifest)
    strategies[JUDGE] = _strategy_report(judge_pairs, manifest)
    return EvalReport(
        per_strategy=strategies,
        dataset={"name": manifest.name, "version": manifest.version, "cases": str(n)},
        run_metadata=dict(run_metadata or {}),
    )


def emit_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write report.json and one confusion_<strategy>.csv per strategy."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    report_path = out / "report.json"
    with report_path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    written.append(report_path)
    for strategy in sorted(report.per_strategy):
        matrix = report.per_strategy[strategy].confusion
        path = out / f"confusion_{strategy_file_stem(strategy)}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["true_label", *matrix.columns])
            for label, row in zip(matrix.labels, matrix.counts):
                writer.writerow([label, *row])
        written.append(path)
    logger.info(f"Wrote {len(written)} report files to {out}")
    return written
