"""Hash-chained, append-only audit log stored as JSON Lines."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Literal, Optional

from ..common.errors import AuditError

GENESIS_HASH = "0" * 64
STAGES = ("ingest", "fan_out", "parse", "consensus", "judge", "decision")

EventKind = Literal["ingest", "fan_out", "parse", "consensus", "judge", "decision"]

_FIELDS = ("seq", "timestamp", "case_id", "kind", "payload_digest", "prev_hash", "entry_hash")


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def payload_digest(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def entry_hash(
    seq: int, timestamp: str, case_id: str, kind: str, digest: str, prev_hash: str
) -> str:
    material = f"{seq}|{timestamp}|{case_id}|{kind}|{digest}|{prev_hash}"
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class AuditEntry:
    seq: int
    timestamp: str
    case_id: str
    kind: str
    payload_digest: str
    prev_hash: str
    entry_hash: str

    def expected_hash(self) -> str:
        return entry_hash(
            self.seq, self.timestamp, self.case_id, self.kind, self.payload_digest, self.prev_hash
        )

    def to_line(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass(frozen=True)
class AuditVerification:
    """`valid`, or the 1-based sequence position of the first broken entry."""

    valid: bool
    broken_at: Optional[int] = None
    reason: str = ""


class AuditLog:
    """Single-writer append log; in memory when no path is given."""

    def __init__(
        self,
        path: str | os.PathLike | None = None,
        clock: Callable[[], datetime] = _utc_now,
    ):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self.logger = logging.getLogger(self.__class__.__name__)
        self._lock = threading.Lock()
        self._entries: list[AuditEntry] = []
        self._seq = 0
        self._prev_hash = GENESIS_HASH
        if self.path is not None:
            self._resume()

    def _resume(self) -> None:
        assert self.path is not None
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            return
        entries = read_audit(self.path)
        if entries:
            self._seq = entries[-1].seq
            self._prev_hash = entries[-1].entry_hash
            self.logger.info(f"Resuming audit log {self.path} at sequence {self._seq}")

    def append(self, case_id: str, kind: EventKind, payload: Any) -> AuditEntry:
        """Chain a new entry onto the log; appends are serialized."""
        if kind not in STAGES:
            raise AuditError(f"unknown audit event kind {kind!r}")
        digest = payload_digest(payload)
        with self._lock:
            seq = self._seq + 1
            timestamp = self.clock().isoformat()
            entry = AuditEntry(
                seq=seq,
                timestamp=timestamp,
                case_id=case_id,
                kind=kind,
                payload_digest=digest,
                prev_hash=self._prev_hash,
                entry_hash=entry_hash(seq, timestamp, case_id, kind, digest, self._prev_hash),
            )
            if self.path is not None:
                try:
                    with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                        fh.write(entry.to_line() + "\n")
                except OSError as e:
                    self.logger.error(f"Error appending to audit log {self.path}: {e}")
                    raise
            self._entries.append(entry)
            self._seq = seq
            self._prev_hash = entry.entry_hash
        return entry

    def entries(self) -> list[AuditEntry]:
        """Entries appended through this handle, in sequence order."""
        with self._lock:
            return list(self._entries)


def append_audit(log: AuditLog, case_id: str, kind: EventKind, payload: Any) -> AuditEntry:
    return log.append(case_id, kind, payload)


def _parse_line(raw: bytes) -> AuditEntry:
    data = json.loads(raw.decode("utf-8"))
    if not isinstance(data, dict) or set(data) != set(_FIELDS):
        raise ValueError("entry does not carry exactly the audit fields")
    if not isinstance(data["seq"], int) or isinstance(data["seq"], bool):
        raise ValueError("seq is not an integer")
    if not all(isinstance(data[k], str) for k in _FIELDS[1:]):
        raise ValueError("non-string audit field")
    return AuditEntry(**data)


def _lines(path: Path) -> list[bytes]:
    data = path.read_bytes()
    if not data:
        return []
    lines = data.split(b"\n")
    if lines[-1] == b"":
        lines.pop()
    else:
        # a missing terminator means the last write was cut short
        lines[-1] = lines[-1] + b"\x00"
    return lines


def read_audit(path: str | os.PathLike) -> list[AuditEntry]:
    """Parse every entry; AuditError names the first line that is not a well-formed entry."""
    entries = []
    for index, raw in enumerate(_lines(Path(path)), start=1):
        try:
            entries.append(_parse_line(raw))
        except (UnicodeDecodeError, ValueError) as e:
            raise AuditError(f"audit line {index} is malformed: {e}") from e
    return entries


def verify_entries(entries: Iterable[AuditEntry]) -> AuditVerification:
    prev = GENESIS_HASH
    for position, entry in enumerate(entries, start=1):
        if entry.seq != position:
            return AuditVerification(False, position, f"sequence {entry.seq} at position {position}")
        if entry.prev_hash != prev:
            return AuditVerification(False, position, "prev_hash does not link to the previous entry")
        if entry.expected_hash() != entry.entry_hash:
            return AuditVerification(False, position, "entry_hash does not match its fields")
        prev = entry.entry_hash
    return AuditVerification(True)


def verify_audit(path: str | os.PathLike) -> AuditVerification:
    """Recompute every hash and link; report the first break."""
    entries = []
    for position, raw in enumerate(_lines(Path(path)), start=1):
        try:
            entries.append(_parse_line(raw))
        except (UnicodeDecodeError, ValueError) as e:
            # entries before an unreadable line still have to chain correctly
            head = verify_entries(entries)
            if not head.valid:
                return head
            return AuditVerification(False, position, f"unreadable entry: {e}")
    return verify_entries(entries)


def case_trail(entries: Iterable[AuditEntry], case_id: str) -> list[AuditEntry]:
    """One case's entries in stage order."""
    return sorted((e for e in entries if e.case_id == case_id), key=lambda e: e.seq)
