"""Prediction parsing: JSON-first extraction with a lexicon fallback."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

from ..common.errors import (
    FailedUpstream,
    InvalidConfidence,
    UnknownJsonLabel,
    UnknownLabel,
    Unparseable,
)
from ..domain.case import LabelTaxonomy, label_key
from ..domain.prediction import Prediction, RawModelResponse

RATIONALE_LIMIT = 500

_DECODER = json.JSONDecoder()
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class Extraction:
    label: str
    confidence: Optional[float]
    rationale: str
    path: Literal["json", "lexicon"]


def normalize_label(text: str, taxonomy: LabelTaxonomy) -> str:
    """Resolve free text to a label: exact match on the normalized form or a synonym."""
    key = label_key(text)
    if key in taxonomy.labels:
        return key
    for surface, target in taxonomy.synonyms.items():
        if label_key(surface) == key:
            return target
    raise UnknownLabel(f"{text!r} does not name a taxonomy label")


def _json_objects(body: str):
    """Yield every well-formed JSON object embedded in the text, in order."""
    idx = body.find("{")
    while idx != -1:
        try:
            obj, end = _DECODER.raw_decode(body, idx)
        except (ValueError, RecursionError):
            idx = body.find("{", idx + 1)
            continue
        if isinstance(obj, dict):
            yield obj
            idx = body.find("{", end)
        else:
            idx = body.find("{", idx + 1)


def _confidence(value: object) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfidence(f"confidence {value!r} is not a number")
    try:
        value = float(value)
    except OverflowError:
        raise InvalidConfidence(f"confidence {value} does not fit a float") from None
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise InvalidConfidence(f"confidence {value} outside [0, 1]")
    return value


def _trim(text: str) -> str:
    return _WS.sub(" ", text).strip()[:RATIONALE_LIMIT]


def _from_json(
    body: str, taxonomy: LabelTaxonomy, label_field: str, rationale_field: str
) -> Optional[Extraction]:
    for obj in _json_objects(body):
        raw_label = obj.get(label_field)
        if not isinstance(raw_label, str):
            continue
        try:
            label = normalize_label(raw_label, taxonomy)
        except UnknownLabel:
            raise UnknownJsonLabel(raw_label) from None
        confidence = None
        if obj.get("confidence") is not None:
            confidence = _confidence(obj["confidence"])
        rationale = obj.get(rationale_field)
        return Extraction(
            label=label,
            confidence=confidence,
            rationale=_trim(rationale) if isinstance(rationale, str) else "",
            path="json",
        )
    return None


@lru_cache(maxsize=64)
def _lexicon(forms: tuple[tuple[str, str], ...]) -> tuple[tuple[re.Pattern, int, str], ...]:
    compiled = []
    for surface, label in forms:
        pattern = re.compile(
            r"(?<![a-z0-9_])" + re.escape(surface) + r"(?![a-z0-9_])", re.IGNORECASE
        )
        compiled.append((pattern, len(surface), label))
    return tuple(compiled)


def _from_lexicon(body: str, taxonomy: LabelTaxonomy) -> Optional[Extraction]:
    forms = tuple(sorted(taxonomy.surface_forms().items()))
    best: Optional[tuple[int, int, int, str]] = None
    for pattern, length, label in _lexicon(forms):
        match = pattern.search(body)
        if match is None:
            continue
        # longest surface form wins, then the earliest position
        candidate = (-length, match.start(), match.end(), label)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    if best is None:
        return None
    _, start, end, label = best
    return Extraction(
        label=label,
        confidence=None,
        rationale=_trim(body[:start] + " " + body[end:]),
        path="lexicon",
    )


def extract_label(
    body: str,
    taxonomy: LabelTaxonomy,
    label_field: str = "label",
    rationale_field: str = "rationale",
) -> Extraction:
    """Run the extraction cascade over model text; the first success wins."""
    found = _from_json(body, taxonomy, label_field, rationale_field)
    if found is None:
        found = _from_lexicon(body, taxonomy)
    if found is None:
        raise Unparseable(f"no {label_field} and no taxonomy term in {body[:80]!r}")
    return found


def parse_prediction(raw: RawModelResponse, taxonomy: LabelTaxonomy) -> Prediction:
    """Turn a successful raw response into a Prediction."""
    if not raw.ok or raw.body_text is None:
        raise FailedUpstream(f"{raw.model_id} finished with status {raw.status.value}")
    found = extract_label(raw.body_text, taxonomy)
    return Prediction(
        model_id=raw.model_id,
        label=found.label,
        confidence=found.confidence,
        rationale=found.rationale,
        raw=raw,
        latency_ms=raw.latency_ms,
    )
