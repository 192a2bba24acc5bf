"""Conversation-format export for instruction tuning."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

from ..common.errors import EmptyAssistantContent
from ..domain.case import DatasetManifest, ManifestEntry

logger = logging.getLogger(__name__)


def assistant_text(entry: ManifestEntry) -> str:
    """Annotations, else the label identifier."""
    if entry.annotations.strip():
        return entry.annotations
    if entry.ground_truth:
        return entry.ground_truth
    raise EmptyAssistantContent(f"entry {entry.case_id} has neither annotations nor a label")


def conversation_record(entry: ManifestEntry, instruction: str) -> dict:
    return {
        "messages": [
            {
                "role": "user",
                "content": [
                    {"type": "text", "text": instruction},
                    {"type": "image", "image": entry.image_path},
                ],
            },
            {"role": "assistant", "content": assistant_text(entry)},
        ]
    }


def export_conversations(
    manifest: DatasetManifest, instruction: str, out: str | os.PathLike
) -> int:
    """Write one conversation per manifest entry as JSON Lines; returns the record count."""
    # validate everything before the file is touched
    records = [conversation_record(entry, instruction) for entry in manifest.entries]
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    logger.info(f"Exported {len(records)} conversations to {out}")
    return len(records)
