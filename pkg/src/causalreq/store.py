"""Append-only label store with deterministic replay.

Every accepted submission is appended to a JSONL log together with the
wall-clock receipt time; the current-state index (latest label per
sentence and annotator) is derived from the log and can be rebuilt from
it exactly. Exports are canonical: sorted keys, sorted records, so a
replayed store exports byte-identical files.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Iterator, Optional

from .corpus import CausalLabelRecord, CorpusError


class StoreError(ValueError):
    """Raised on invalid store submissions or corrupt logs."""


def _record_to_payload(record: CausalLabelRecord) -> dict:
    payload = asdict(record)
    payload["cue_phrases"] = list(record.cue_phrases)
    return payload


def _record_from_payload(payload: dict) -> CausalLabelRecord:
    payload = dict(payload)
    payload["cue_phrases"] = tuple(payload.get("cue_phrases") or ())
    return CausalLabelRecord(**payload)


@dataclass(frozen=True)
class LogEntry:
    action: str  # "label" or "defer"
    received_at: str
    annotator: str
    sentence_id: str
    record: Optional[CausalLabelRecord] = None


class LabelStore:
    """File-backed append-only log with an in-memory current-state index."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._lock = threading.Lock()
        self._index: dict[tuple[str, str], CausalLabelRecord] = {}
        self._deferred: set[tuple[str, str]] = set()
        self._entries = 0
        if os.path.exists(path):
            self._replay_file(path)

    def _replay_file(self, path: str) -> None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreError(f"{path}:{lineno}: corrupt log line ({exc.msg})") from None
                self._apply(entry)
                self._entries += 1

    def _apply(self, entry: dict) -> None:
        action = entry.get("action")
        key = (str(entry.get("sentence_id")), str(entry.get("annotator")))
        if action == "label":
            try:
                record = _record_from_payload(entry["record"])
            except (KeyError, TypeError, CorpusError) as exc:
                raise StoreError(f"invalid logged record: {exc}") from None
            self._index[key] = record
            self._deferred.discard(key)
        elif action == "defer":
            self._deferred.add(key)
        else:
            raise StoreError(f"unknown log action {action!r}")

    def _append(self, entry: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
        self._entries += 1

    def submit(self, record: CausalLabelRecord) -> dict:
        """Append a label; resubmission replaces the annotator's current label."""
        record.validate()
        with self._lock:
            key = (record.sentence_id, record.annotator)
            replaced = key in self._index
            entry = {
                "action": "label",
                "received_at": datetime.now(timezone.utc).isoformat(),
                "annotator": record.annotator,
                "sentence_id": record.sentence_id,
                "record": _record_to_payload(record),
            }
            self._append(entry)
            self._index[key] = record
            self._deferred.discard(key)
            return {"status": "replaced" if replaced else "accepted"}

    def defer(self, sentence_id: str, annotator: str) -> dict:
        with self._lock:
            self._append(
                {
                    "action": "defer",
                    "received_at": datetime.now(timezone.utc).isoformat(),
                    "annotator": annotator,
                    "sentence_id": sentence_id,
                }
            )
            self._deferred.add((sentence_id, annotator))
            return {"status": "deferred"}

    def current(self, sentence_id: str, annotator: str) -> Optional[CausalLabelRecord]:
        return self._index.get((sentence_id, annotator))

    def labeled_by(self, annotator: str) -> set[str]:
        return {sid for (sid, ann) in self._index if ann == annotator}

    def deferred_by(self, annotator: str) -> set[str]:
        return {
            sid
            for (sid, ann) in self._deferred
            if ann == annotator and (sid, ann) not in self._index
        }

    def records(self) -> Iterator[CausalLabelRecord]:
        for key in sorted(self._index):
            yield self._index[key]

    @property
    def log_length(self) -> int:
        return self._entries

    def export_labels(self) -> str:
        """Canonical JSONL export of the current labels (replay-stable)."""
        lines = []
        for record in self.records():
            lines.append(json.dumps(_record_to_payload(record), sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")

    def export_to(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.export_labels())

    @classmethod
    def replay(cls, log_path: str) -> "LabelStore":
        """Rebuild a store by replaying an existing log."""
        return cls(log_path)
