"""Ingestion service: canonicalize, anonymize, address by content and store."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Mapping, Optional

from ..catalog.store import CaseStore
from ..common.errors import InvalidLabel, ParseError
from ..common.telemetry import Telemetry
from ..domain.case import (
    CaseRecord,
    DatasetManifest,
    ImagePayload,
    LabelTaxonomy,
    ManifestEntry,
    digest_bytes,
)
from .normalizer import CANONICAL_MEDIA_TYPE, ImageNormalizer, MetadataAnonymizer

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class IngestionService:
    """Coordinates ingestion of raw images into the case store."""

    def __init__(
        self,
        store: CaseStore,
        normalizer: ImageNormalizer,
        anonymizer: MetadataAnonymizer,
        telemetry: Telemetry,
    ):
        self.store = store
        self.normalizer = normalizer
        self.anonymizer = anonymizer
        self.telemetry = telemetry

    def ingest_case(
        self,
        image_bytes: bytes,
        meta: Mapping[str, object],
        ground_truth: Optional[str],
        taxonomy: LabelTaxonomy,
        annotations: str = "",
    ) -> CaseRecord:
        """Store one case; the same image always yields the same case_id."""
        if ground_truth is not None and ground_truth not in taxonomy:
            raise InvalidLabel(f"ground truth {ground_truth!r} not in taxonomy")
        canonical = self.normalizer.normalize(image_bytes)
        record = CaseRecord(
            case_id=digest_bytes(canonical),
            image=ImagePayload(canonical, CANONICAL_MEDIA_TYPE),
            ground_truth=ground_truth,
            annotations=annotations,
            source_meta=self.anonymizer.anonymize(meta),
        )
        self.store.put(record)
        self.telemetry.record_event("ingest", case_id=record.case_id[:12], label=ground_truth)
        return record

    def _read_sidecar(self, image_path: Path) -> dict:
        sidecar = image_path.with_suffix(".json")
        if not sidecar.exists():
            return {}
        try:
            with sidecar.open("r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"sidecar {sidecar} does not parse: {e}") from e
        if not isinstance(data, dict):
            raise ParseError(f"sidecar {sidecar} is not a JSON object")
        return data

    def ingest_directory(
        self, directory: str | os.PathLike, taxonomy: LabelTaxonomy
    ) -> list[CaseRecord]:
        """Ingest every PNG/JPEG under a directory, with optional `<stem>.json` sidecars."""
        logger = logging.getLogger(self.__class__.__name__)
        records = []
        for image_path in sorted(Path(directory).rglob("*")):
            if image_path.suffix.lower() not in IMAGE_SUFFIXES or not image_path.is_file():
                continue
            sidecar = self._read_sidecar(image_path)
            try:
                record = self.ingest_case(
                    image_path.read_bytes(),
                    sidecar.get("meta") or {},
                    sidecar.get("label"),
                    taxonomy,
                    annotations=sidecar.get("annotations") or "",
                )
            except Exception as e:
                logger.error(f"Error ingesting {image_path}: {e}")
                raise
            records.append(record)
        logger.info(f"Ingested {len(records)} cases from {directory}")
        return records

    def manifest_for(
        self,
        records: list[CaseRecord],
        taxonomy: LabelTaxonomy,
        manifest_dir: str | os.PathLike,
        name: str = "",
        version: str = "",
    ) -> DatasetManifest:
        """A manifest over stored cases, image paths relative to the manifest directory."""
        entries = []
        seen = set()
        for record in records:
            if record.case_id in seen:
                continue
            seen.add(record.case_id)
            image = os.path.relpath(self.store.image_path(record.case_id), manifest_dir)
            entries.append(
                ManifestEntry(
                    case_id=record.case_id,
                    image_path=Path(image).as_posix(),
                    ground_truth=record.ground_truth,
                    annotations=record.annotations,
                )
            )
        return DatasetManifest(
            taxonomy=taxonomy,
            entries=tuple(entries),
            name=name,
            version=version,
            base_dir=str(manifest_dir),
        )
