"""Application composition root for potbi."""

from __future__ import annotations

import os
import random
from typing import Optional

from .catalog.store import CaseStore
from .common.config import RunConfig, load_config
from .common.telemetry import Telemetry
from .gateway.client import ModelGateway
from .ingestion.exporter import export_conversations
from .ingestion.normalizer import ImageNormalizer, MetadataAnonymizer
from .ingestion.service import IngestionService
from .judge.service import ReasoningJudge
from .pipeline.service import PipelineService
from .provenance.audit import AuditLog


class Application:
    """Composition root; wires the run configuration into services."""

    def __init__(self, config: RunConfig, telemetry: Telemetry, audit: Optional[AuditLog] = None):
        self.config = config
        self.telemetry = telemetry
        self.normalizer = ImageNormalizer(config.max_image_side)
        self.anonymizer = MetadataAnonymizer(config.strip_keys)
        self.case_store = CaseStore(config.case_store)
        self.ingestion_service = IngestionService(
            self.case_store, self.normalizer, self.anonymizer, telemetry
        )
        # the seed also fixes retry jitter
        self.gateway = ModelGateway(telemetry=telemetry, rng=random.Random(config.seed))
        self.judge = ReasoningJudge(self.gateway)
        self.audit = audit or AuditLog(config.audit_path)
        self.pipeline = PipelineService(
            config, self.gateway, self.judge, self.audit, telemetry, self.normalizer
        )

    @classmethod
    def build_default(cls, config_path: str | os.PathLike | None = None, **overrides) -> "Application":
        """Factory: load the config file, apply overrides, fresh telemetry."""
        config = load_config(config_path).with_overrides(**overrides)
        return cls(config, Telemetry())

    def export_conversations(self, manifest, instruction: str, out) -> int:
        count = export_conversations(manifest, instruction, out)
        self.telemetry.record_event("export", records=count)
        return count
