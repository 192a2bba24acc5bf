"""Raw model responses and structured predictions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class ResponseStatus(str, enum.Enum):
    OK = "ok"
    TIMEOUT = "timeout"
    TRANSPORT_ERROR = "transport_error"
    PROTOCOL_ERROR = "protocol_error"


@dataclass(frozen=True)
class RawModelResponse:
    """Terminal outcome of one endpoint call, failures included."""

    model_id: str
    status: ResponseStatus
    body_text: Optional[str] = None
    latency_ms: int = 0
    attempts: int = 1
    error: str = ""

    def __post_init__(self):
        if (self.status is ResponseStatus.OK) != (self.body_text is not None):
            raise ValueError("body_text must be present exactly when status is ok")

    @property
    def ok(self) -> bool:
        return self.status is ResponseStatus.OK

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "status": self.status.value,
            "body_text": self.body_text,
            "latency_ms": self.latency_ms,
            "attempts": self.attempts,
            "error": self.error,
        }


@dataclass(frozen=True)
class Prediction:
    """One member's structured verdict for a case."""

    model_id: str
    label: str
    confidence: Optional[float] = None
    rationale: str = ""
    raw: Optional[RawModelResponse] = None
    latency_ms: int = 0

    def __post_init__(self):
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "label": self.label,
            "confidence": self.confidence,
            "rationale": self.rationale,
            "latency_ms": self.latency_ms,
        }
