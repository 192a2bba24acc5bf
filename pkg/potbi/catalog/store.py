"""Directory-backed case store: images/<case_id>.png plus index.json."""

from __future__ import annotations

import json
import logging
import os
import threading
from collections import Counter
from pathlib import Path
from typing import Optional

from ..domain.case import CaseRecord, ImagePayload

INDEX_FILE = "index.json"
IMAGES_DIR = "images"


class CaseStore:
    """Stores and retrieves canonical cases. Reads are lock-free; writes are serialized."""

    def _get_logger(self):
        return logging.getLogger(self.__class__.__name__)

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.images_dir = self.root / IMAGES_DIR
        self.index_path = self.root / INDEX_FILE
        self._write_lock = threading.Lock()
        self.images_dir.mkdir(parents=True, exist_ok=True)

    def image_path(self, case_id: str) -> Path:
        return self.images_dir / f"{case_id}.png"

    def _read_index(self) -> dict[str, dict]:
        if not self.index_path.exists():
            return {}
        with self.index_path.open("r", encoding="utf-8") as fh:
            return json.load(fh)

    def _write_index(self, index: dict[str, dict]) -> None:
        tmp = self.index_path.with_suffix(".json.tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(index, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self.index_path)

    def put(self, record: CaseRecord) -> None:
        """Persist a record; re-putting the same case_id overwrites its metadata."""
        logger = self._get_logger()
        with self._write_lock:
            try:
                path = self.image_path(record.case_id)
                if not path.exists():
                    tmp = path.with_suffix(".png.tmp")
                    tmp.write_bytes(record.image.data)
                    os.replace(tmp, path)
                index = self._read_index()
                index[record.case_id] = {
                    "media_type": record.image.media_type,
                    "ground_truth": record.ground_truth,
                    "annotations": record.annotations,
                    "source_meta": dict(sorted(record.source_meta.items())),
                }
                self._write_index(index)
            except OSError as e:
                logger.error(f"Error storing case {record.case_id}: {e}")
                raise

    def _to_record(self, case_id: str, row: dict) -> CaseRecord:
        return CaseRecord(
            case_id=case_id,
            image=ImagePayload(self.image_path(case_id).read_bytes(), row.get("media_type", "image/png")),
            ground_truth=row.get("ground_truth"),
            annotations=row.get("annotations") or "",
            source_meta=dict(row.get("source_meta") or {}),
        )

    def get(self, case_id: str) -> Optional[CaseRecord]:
        row = self._read_index().get(case_id)
        return self._to_record(case_id, row) if row is not None else None

    def query(self, label: Optional[str] = None, id_prefix: Optional[str] = None) -> list[CaseRecord]:
        """Matching records in ascending case_id order."""
        index = self._read_index()
        records = []
        for case_id in sorted(index):
            row = index[case_id]
            if label is not None and row.get("ground_truth") != label:
                continue
            if id_prefix is not None and not case_id.startswith(id_prefix):
                continue
            records.append(self._to_record(case_id, row))
        return records

    def label_counts(self) -> dict[str, int]:
        counts = Counter(row.get("ground_truth") or "unlabeled" for row in self._read_index().values())
        return dict(sorted(counts.items()))


def query_cases(store: CaseStore, label: Optional[str] = None, id_prefix: Optional[str] = None) -> list[CaseRecord]:
    return store.query(label=label, id_prefix=id_prefix)
