"""Case, taxonomy and manifest entities."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .diagnosis import ABSTAIN

DEFAULT_LABELS = ("no_tbi", "mild_tbi", "moderate_tbi", "severe_tbi")
DEFAULT_SYNONYMS = {
    "no tbi": "no_tbi",
    "normal": "no_tbi",
    "no traumatic brain injury": "no_tbi",
    "mild tbi": "mild_tbi",
    "mtbi": "mild_tbi",
    "mild traumatic brain injury": "mild_tbi",
    "moderate tbi": "moderate_tbi",
    "moderate traumatic brain injury": "moderate_tbi",
    "severe tbi": "severe_tbi",
    "severe traumatic brain injury": "severe_tbi",
}

_WS = re.compile(r"\s+")


def label_key(text: str) -> str:
    """Lowercase, trim and collapse internal whitespace to underscores."""
    return _WS.sub("_", text.strip().lower())


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class LabelTaxonomy(BaseModel):
    """Ordered label set plus surface-string synonyms."""

    labels: tuple[str, ...] = DEFAULT_LABELS
    synonyms: dict[str, str] = Field(default_factory=lambda: dict(DEFAULT_SYNONYMS))

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check(self) -> "LabelTaxonomy":
        if len(self.labels) < 2:
            raise ValueError("taxonomy needs at least two labels")
        if any(not label for label in self.labels):
            raise ValueError("taxonomy labels must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("taxonomy labels must be unique")
        if any(label_key(label) == ABSTAIN for label in self.labels):
            raise ValueError(f"{ABSTAIN!r} is reserved and cannot be a taxonomy label")
        for surface, target in self.synonyms.items():
            if target not in self.labels:
                raise ValueError(f"synonym {surface!r} maps to unknown label {target!r}")
        return self

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def surface_forms(self) -> dict[str, str]:
        """Every lowercase surface string that names a label."""
        forms: dict[str, str] = {}
        for label in self.labels:
            forms[label.lower()] = label
            forms[label.lower().replace("_", " ")] = label
        for surface, target in self.synonyms.items():
            forms[surface.strip().lower()] = target
        return forms

    def as_list_text(self) -> str:
        return ", ".join(self.labels)


@dataclass(frozen=True)
class ImagePayload:
    """Image bytes with their media type."""

    data: bytes
    media_type: str = "image/png"


@dataclass(frozen=True)
class CaseRecord:
    """One content-addressed imaging case."""

    case_id: str
    image: ImagePayload
    ground_truth: Optional[str] = None
    annotations: str = ""
    source_meta: dict[str, str] = field(default_factory=dict)

    def recompute_id(self) -> str:
        return digest_bytes(self.image.data)

    def summary(self) -> dict:
        return {
            "case_id": self.case_id,
            "media_type": self.image.media_type,
            "ground_truth": self.ground_truth,
            "annotations": self.annotations,
            "source_meta": dict(sorted(self.source_meta.items())),
        }


@dataclass(frozen=True)
class ManifestEntry:
    case_id: str
    image_path: str
    ground_truth: Optional[str] = None
    annotations: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    """A named, versioned list of labeled cases sharing one taxonomy."""

    taxonomy: LabelTaxonomy
    entries: tuple[ManifestEntry, ...]
    name: str = ""
    version: str = ""
    base_dir: str = "."

    def truth_lookup(self) -> dict[str, str]:
        return {e.case_id: e.ground_truth for e in self.entries if e.ground_truth}

    def find(self, case_id: str) -> Optional[ManifestEntry]:
        for entry in self.entries:
            if entry.case_id == case_id:
                return entry
        return None


# Pydantic models for the manifest file format


class ManifestEntryModel(BaseModel):
    case_id: Optional[str] = None
    image: str
    label: Optional[str] = None
    annotations: Optional[str] = None


class ManifestModel(BaseModel):
    name: str = ""
    version: str = ""
    taxonomy: LabelTaxonomy = Field(default_factory=LabelTaxonomy)
    entries: list[ManifestEntryModel] = Field(default_factory=list)
