"""Per-member error profiles."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..common.errors import ParseError

Style = Literal["json", "prose", "noisy"]

ROW_TOLERANCE = 1e-9


class ErrorProfile(BaseModel):
    """Confusion rows (true label -> predicted distribution) plus rendering and fault knobs."""

    rows: dict[str, dict[str, float]]
    style: Style = "json"
    latency_ms: int = Field(default=0, ge=0)
    failure_rate: float = Field(default=0.0, ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_rows(self) -> "ErrorProfile":
        if not self.rows:
            raise ValueError("profile needs at least one confusion row")
        for true_label, row in self.rows.items():
            if any(p < 0 or math.isnan(p) for p in row.values()):
                raise ValueError(f"row {true_label!r} has a negative probability")
            if abs(sum(row.values()) - 1.0) > ROW_TOLERANCE:
                raise ValueError(f"row {true_label!r} sums to {sum(row.values())}, not 1")
        return self

    def covers(self, label: str) -> bool:
        return label in self.rows


def symmetric_profile(
    labels: Sequence[str],
    accuracy: float,
    style: Style = "json",
    latency_ms: int = 0,
    failure_rate: float = 0.0,
) -> ErrorProfile:
    """Correct with probability `accuracy`, errors spread evenly over the other labels."""
    labels = list(labels)
    miss = (1.0 - accuracy) / (len(labels) - 1)
    rows = {t: {p: (accuracy if p == t else miss) for p in labels} for t in labels}
    return ErrorProfile(rows=rows, style=style, latency_ms=latency_ms, failure_rate=failure_rate)


def identity_profile(labels: Sequence[str], style: Style = "json", latency_ms: int = 0) -> ErrorProfile:
    return symmetric_profile(labels, 1.0, style=style, latency_ms=latency_ms)


def load_profiles(path: str | os.PathLike) -> dict[str, ErrorProfile]:
    """Read a JSON map of model_name -> profile."""
    try:
        with Path(path).open("r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ParseError(f"profile file {path} must hold a JSON object")
        return {name: ErrorProfile.model_validate(fields) for name, fields in raw.items()}
    except (json.JSONDecodeError, ValidationError) as e:
        raise ParseError(f"profile file {path} does not parse: {e}") from e


def dump_profiles(profiles: dict[str, ErrorProfile], path: str | os.PathLike) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump({k: v.model_dump() for k, v in profiles.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
