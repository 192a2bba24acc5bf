"""Evaluation result models."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .diagnosis import ABSTAIN

MAJORITY = "majority"
JUDGE = "judge"
RESERVED_STRATEGIES = frozenset({MAJORITY, JUDGE})


def strategy_file_stem(strategy: str) -> str:
    """Filename-safe form of a strategy name, used for its confusion CSV."""
    return re.sub(r"[^A-Za-z0-9_.-]", "_", strategy)


def strategy_name_conflicts(model_ids: Iterable[str]) -> list[str]:
    """Member ids that shadow a built-in strategy or share a CSV name with an earlier one.

    CSV names compare case-insensitively.
    """
    conflicts = []
    stems = {strategy_file_stem(s): s for s in RESERVED_STRATEGIES}
    for model_id in model_ids:
        stem = strategy_file_stem(model_id).lower()
        if model_id in RESERVED_STRATEGIES or stem in stems:
            conflicts.append(model_id)
        stems.setdefault(stem, model_id)
    return conflicts


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true labels, columns predicted labels plus a trailing abstain column."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.labels + (ABSTAIN,)

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.labels)))

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def column_sum(self, j: int) -> int:
        return sum(row[j] for row in self.counts)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "columns": list(self.columns),
            "counts": [list(row) for row in self.counts],
        }


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True)
class MetricsSummary:
    accuracy: float
    per_class: dict[str, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float


@dataclass(frozen=True)
class StrategyReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: dict[str, ClassMetrics]
    abstain_rate: float
    macro_f1: float = 0.0
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    top_confusions: tuple[dict, ...] = ()
    agreement_with_final: Optional[float] = None

    def to_dict(self) -> dict:
        data = {
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "abstain_rate": self.abstain_rate,
            "per_class": {k: v.to_dict() for k, v in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "top_confusions": list(self.top_confusions),
        }
        if self.agreement_with_final is not None:
            data["agreement_with_final"] = self.agreement_with_final
        return data


@dataclass(frozen=True)
class EvalReport:
    per_strategy: dict[str, StrategyReport]
    dataset: dict[str, str]
    run_metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dataset": dict(self.dataset),
            "run_metadata": dict(self.run_metadata),
            "strategies": {k: v.to_dict() for k, v in self.per_strategy.items()},
        }


@dataclass(frozen=True)
class CaseOutcome:
    """Everything one case produced: member predictions, consensus and final decision."""

    case_id: str
    predictions: dict  # model_id -> Prediction | None, in endpoint order
    consensus: object  # ConsensusResult
    final: object  # FinalDiagnosis
    error: str = ""
