"""Dataset manifest loading and writing."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from ..common.errors import DuplicateCaseId, InvalidLabel, MissingImage, ParseError
from ..domain.case import (
    CaseRecord,
    DatasetManifest,
    ImagePayload,
    ManifestEntry,
    ManifestModel,
    digest_bytes,
)
from ..ingestion.normalizer import CANONICAL_MEDIA_TYPE, ImageNormalizer

logger = logging.getLogger(__name__)


def resolve_image(manifest: DatasetManifest, entry: ManifestEntry) -> Path:
    path = Path(entry.image_path)
    return path if path.is_absolute() else Path(manifest.base_dir) / path


def load_manifest(
    path: str | os.PathLike, normalizer: Optional[ImageNormalizer] = None
) -> DatasetManifest:
    """Parse and validate a manifest; image paths resolve against the manifest's directory."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            raw = json.load(fh)
        model = ManifestModel.model_validate(raw)
    except FileNotFoundError as e:
        raise ParseError(f"manifest not found: {path}") from e
    except (json.JSONDecodeError, ValidationError) as e:
        raise ParseError(f"manifest {path} does not parse: {e}") from e

    base_dir = path.parent
    normalizer = normalizer or ImageNormalizer()
    taxonomy = model.taxonomy
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for item in model.entries:
        if item.label is not None and item.label not in taxonomy:
            raise InvalidLabel(f"label {item.label!r} of {item.image} not in taxonomy")
        image_path = Path(item.image) if Path(item.image).is_absolute() else base_dir / item.image
        if not image_path.is_file():
            raise MissingImage(f"image {item.image} does not exist")
        case_id = item.case_id
        if not case_id:
            # entries without an id are addressed by their canonical bytes
            case_id = digest_bytes(normalizer.normalize(image_path.read_bytes()))
        if case_id in seen:
            raise DuplicateCaseId(f"case_id {case_id} appears twice in {path}")
        seen.add(case_id)
        entries.append(
            ManifestEntry(
                case_id=case_id,
                image_path=item.image,
                ground_truth=item.label,
                annotations=item.annotations or "",
            )
        )
    logger.info(f"Loaded manifest {path} with {len(entries)} entries")
    return DatasetManifest(
        taxonomy=taxonomy,
        entries=tuple(entries),
        name=model.name,
        version=model.version,
        base_dir=str(base_dir),
    )


def load_case(
    manifest: DatasetManifest, entry: ManifestEntry, normalizer: Optional[ImageNormalizer] = None
) -> CaseRecord:
    """Canonicalize an entry's image into a CaseRecord carrying the entry's id and label."""
    normalizer = normalizer or ImageNormalizer()
    data = normalizer.normalize(resolve_image(manifest, entry).read_bytes())
    return CaseRecord(
        case_id=entry.case_id,
        image=ImagePayload(data, CANONICAL_MEDIA_TYPE),
        ground_truth=entry.ground_truth,
        annotations=entry.annotations,
    )


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    entries = []
    for entry in manifest.entries:
        item: dict = {"case_id": entry.case_id, "image": entry.image_path}
        if entry.ground_truth is not None:
            item["label"] = entry.ground_truth
        if entry.annotations:
            item["annotations"] = entry.annotations
        entries.append(item)
    return {
        "name": manifest.name,
        "version": manifest.version,
        "taxonomy": {
            "labels": list(manifest.taxonomy.labels),
            "synonyms": dict(manifest.taxonomy.synonyms),
        },
        "entries": entries,
    }


def write_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(manifest_to_dict(manifest), fh, indent=2)
        fh.write("\n")
    return path
